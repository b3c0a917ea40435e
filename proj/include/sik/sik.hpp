// sik - Sparse Inverse Kit
// Copyright 2026 sik Contributors
// Licensed under Apache 2.0

#pragma once

#include "sik/common.hpp"
#include "sik/harness.hpp"
#include "sik/io.hpp"
#include "sik/operators.hpp"
#include "sik/simulation.hpp"
#include "sik/solvers.hpp"
