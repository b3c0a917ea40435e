// sik - Sparse Inverse Kit
// Copyright 2026 sik Contributors
// Licensed under Apache 2.0

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "sik/io.hpp"

namespace fs = std::filesystem;
using sik::ImageGrid;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("sik_io_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  REQUIRE(f);
  f << content;
}

}  // namespace

TEST_CASE("format_double round trips exactly") {
  sik::Rng rng(71);
  for (int rep = 0; rep < 200; ++rep) {
    const double x = rng.gaussian() * std::pow(10.0, rng.uniform(-30.0, 30.0));
    const std::string s = sik::format_double(x);
    double back = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(res.ec == std::errc{});
    CHECK(back == x);
  }
  CHECK(sik::format_double(0.0) == "0");
  CHECK(sik::format_double(-1.5) == "-1.5");
}

TEST_CASE("image csv round trips bit-exactly") {
  TempDir tmp;
  sik::Rng rng(73);
  ImageGrid img{5, 7, std::vector<double>(35)};
  for (double& v : img.pixels) v = rng.gaussian() * std::pow(10.0, rng.uniform(-20.0, 20.0));
  img.pixels[0] = 0.0;
  img.pixels[1] = -0.0;
  img.pixels[2] = 1e-300;

  const std::string path = tmp.file("img.csv");
  sik::write_image_csv(path, img);
  const ImageGrid back = sik::read_image_csv(path);
  REQUIRE(back.height == img.height);
  REQUIRE(back.width == img.width);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) CHECK(back.pixels[i] == img.pixels[i]);

  // LF endings, no trailing blank row.
  const std::string raw = slurp(path);
  CHECK(raw.find('\r') == std::string::npos);
  CHECK(raw.back() == '\n');
}

TEST_CASE("image csv reports parse errors with location") {
  TempDir tmp;
  const std::string path = tmp.file("bad.csv");

  spit(path, "1,2\n3,oops\n");
  try {
    sik::read_image_csv(path);
    FAIL("expected parse_error");
  } catch (const sik::parse_error& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 3);
    CHECK(std::string(e.what()).find("oops") != std::string::npos);
  }

  spit(path, "1,2\n3\n");
  CHECK_THROWS_AS(sik::read_image_csv(path), sik::parse_error);

  spit(path, "");
  CHECK_THROWS_AS(sik::read_image_csv(path), sik::parse_error);

  CHECK_THROWS_AS(sik::read_image_csv(tmp.file("missing.csv")), sik::io_error);
}

TEST_CASE("pgm writes the linear min-max scaling") {
  TempDir tmp;
  const ImageGrid img{2, 2, {0.0, 0.5, 1.0, 0.25}};
  const std::string path = tmp.file("img.pgm");
  const sik::PgmScale scale = sik::write_pgm(path, img);
  CHECK(scale.lo == 0.0);
  CHECK(scale.hi == 1.0);

  const std::string raw = slurp(path);
  CHECK(raw.substr(0, 3) == "P5\n");
  const std::string payload = raw.substr(raw.size() - 4);
  CHECK(static_cast<unsigned char>(payload[0]) == 0);
  CHECK(static_cast<unsigned char>(payload[1]) == 128);
  CHECK(static_cast<unsigned char>(payload[2]) == 255);
  CHECK(static_cast<unsigned char>(payload[3]) == 64);

  const ImageGrid back = sik::read_pgm(path);
  REQUIRE(back.height == 2);
  REQUIRE(back.width == 2);
  CHECK(back.pixels[2] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("pgm handles flat images and rejects junk") {
  TempDir tmp;
  const ImageGrid flat{2, 2, std::vector<double>(4, 3.14)};
  const std::string path = tmp.file("flat.pgm");
  const sik::PgmScale scale = sik::write_pgm(path, flat);
  CHECK(scale.lo == scale.hi);
  const ImageGrid back = sik::read_pgm(path);
  for (double v : back.pixels) CHECK(v == 0.0);

  spit(tmp.file("junk.pgm"), "P2\n2 2\n255\n0 0 0 0\n");
  CHECK_THROWS_AS(sik::read_pgm(tmp.file("junk.pgm")), sik::parse_error);

  spit(tmp.file("trunc.pgm"), std::string("P5\n# a comment\n4 4\n255\n") + "ab");
  CHECK_THROWS_AS(sik::read_pgm(tmp.file("trunc.pgm")), sik::parse_error);
}

TEST_CASE("read_image_any dispatches on extension") {
  TempDir tmp;
  const ImageGrid img{2, 2, {0.1, 0.2, 0.3, 0.4}};
  sik::write_image_csv(tmp.file("a.csv"), img);
  sik::write_pgm(tmp.file("a.pgm"), img);
  CHECK(sik::read_image_any(tmp.file("a.csv")).pixels == img.pixels);
  CHECK(sik::read_image_any(tmp.file("a.pgm")).width == 2);
  CHECK_THROWS_AS(sik::read_image_any(tmp.file("a.txt")), sik::io_error);
}

TEST_CASE("trace csv format") {
  TempDir tmp;
  sik::IterationTrace trace;
  sik::TraceRecord r1;
  r1.iter = 1;
  r1.cost = 2.5;
  r1.fidelity = 2.0;
  r1.mae = 0.125;
  r1.wall_ms = 3.25;
  sik::TraceRecord r2;
  r2.iter = 2;
  r2.cost = 2.0;
  r2.fidelity = 1.75;
  r2.wall_ms = 6.5;
  trace = {r1, r2};

  const std::string path = tmp.file("trace.csv");
  sik::write_trace_csv(path, trace);
  CHECK(slurp(path) ==
        "iter,cost,fidelity,mae,wall_ms\n"
        "1,2.5,2,0.125,3.25\n"
        "2,2,1.75,,6.5\n");

  sik::write_trace_csv(path, trace, /*pin_timings=*/true);
  CHECK(slurp(path) ==
        "iter,cost,fidelity,mae,wall_ms\n"
        "1,2.5,2,0.125,0\n"
        "2,2,1.75,,0\n");
}

TEST_CASE("results csv format") {
  TempDir tmp;
  sik::ExperimentResult res;
  sik::CellResult a;
  a.strategy = sik::Strategy::eriwsta;
  a.beta = 100.0;
  a.gamma = 0.01;
  a.final_mae = 0.375;
  a.wall_ms = 12.0;
  sik::CellResult b;
  b.strategy = sik::Strategy::ista;
  b.beta = 0.5;
  b.final_mae = 0.5;
  b.diverged = true;
  b.wall_ms = 4.0;
  res.cells = {a, b};

  const std::string path = tmp.file("results.csv");
  sik::write_results_csv(path, res, /*pin_timings=*/true);
  CHECK(slurp(path) ==
        "strategy,beta,gamma,delta,final_mae,diverged,wall_ms\n"
        "eriwsta,100,0.01,,0.375,0,0\n"
        "ista,0.5,,,0.5,1,0\n");
}

TEST_CASE("profiles csv format") {
  TempDir tmp;
  sik::Profiles p;
  p.central_row = {1.0, 2.0};
  p.central_col = {3.0};
  const std::string path = tmp.file("profiles.csv");
  sik::write_profiles_csv(path, p);
  CHECK(slurp(path) ==
        "axis,index,value\n"
        "row,0,1\n"
        "row,1,2\n"
        "col,0,3\n");
}

TEST_CASE("sweep config parses keys, comments and lists") {
  TempDir tmp;
  const std::string path = tmp.file("run.cfg");
  spit(path,
       "# desk run\n"
       "phantom_size = 32\n"
       "phantom_variant = modified\n"
       "sigma = 5e-3   # noise level\n"
       "kernel = 3\n"
       "boundary = replicate\n"
       "noise_seed = 99\n"
       "levels = 3\n"
       "init = atb\n"
       "iters = 12\n"
       "p = 0.25\n"
       "workers = 2\n"
       "strategies = eriwsta, ista\n"
       "beta = 1e-2, 1e-1, 1\n"
       "gamma = 1e-3\n"
       "delta = 1e-4, 1e-2\n"
       "solver_seed = 5\n"
       "step_safety = 1.05\n"
       "pin_timings = true\n"
       "trace_stride = 2\n");

  const sik::SweepFileConfig cfg = sik::parse_sweep_config(path);
  CHECK(cfg.phantom_size == 32);
  CHECK(cfg.phantom_variant == sik::PhantomVariant::modified);
  CHECK(cfg.sigma == 5e-3);
  CHECK(cfg.kernel == 3);
  CHECK(cfg.boundary == sik::Boundary::replicate);
  CHECK(cfg.noise_seed == 99);
  CHECK(cfg.levels == 3);
  CHECK(cfg.init == "atb");
  CHECK(cfg.iters == 12);
  CHECK(cfg.p == 0.25);
  CHECK(cfg.workers == 2);
  REQUIRE(cfg.strategies.size() == 2);
  CHECK(cfg.strategies[0] == sik::Strategy::eriwsta);
  CHECK(cfg.strategies[1] == sik::Strategy::ista);
  CHECK(cfg.beta == std::vector<double>{1e-2, 1e-1, 1.0});
  CHECK(cfg.gamma == std::vector<double>{1e-3});
  CHECK(cfg.delta == std::vector<double>{1e-4, 1e-2});
  CHECK(cfg.solver_seed == 5);
  CHECK(cfg.step_safety == 1.05);
  CHECK(cfg.pin_timings);
  CHECK(cfg.trace_stride == 2);
}

TEST_CASE("sweep config defaults match the desk preset") {
  TempDir tmp;
  const std::string path = tmp.file("empty.cfg");
  spit(path, "# nothing overridden\n");
  const sik::SweepFileConfig cfg = sik::parse_sweep_config(path);
  CHECK(cfg.phantom_size == 64);
  CHECK(cfg.sigma == 1e-2);
  CHECK(cfg.kernel == 5);
  CHECK(cfg.iters == 30);
  CHECK(cfg.strategies.size() == 5);
  CHECK(cfg.beta.size() == 7);
  CHECK(cfg.gamma.size() == 7);
  CHECK(cfg.delta.size() == 7);
}

TEST_CASE("sweep config rejects bad input naming the offender") {
  TempDir tmp;
  const std::string path = tmp.file("bad.cfg");

  spit(path, "phantom_sizee = 64\n");
  try {
    sik::parse_sweep_config(path);
    FAIL("expected config_error");
  } catch (const sik::config_error& e) {
    CHECK(std::string(e.what()).find("phantom_sizee") != std::string::npos);
  }

  spit(path, "beta =\n");
  CHECK_THROWS_AS(sik::parse_sweep_config(path), sik::config_error);
  spit(path, "sigma = abc\n");
  CHECK_THROWS_AS(sik::parse_sweep_config(path), sik::config_error);
  spit(path, "strategies = ista, nope\n");
  CHECK_THROWS_AS(sik::parse_sweep_config(path), sik::config_error);
  spit(path, "just a line\n");
  CHECK_THROWS_AS(sik::parse_sweep_config(path), sik::config_error);
  CHECK_THROWS_AS(sik::parse_sweep_config(tmp.file("missing.cfg")), sik::io_error);
}

TEST_CASE("make_experiment assembles the pipeline") {
  sik::SweepFileConfig cfg;
  cfg.phantom_size = 16;
  cfg.iters = 2;
  const sik::ExperimentSetup setup = sik::make_experiment(cfg);
  CHECK(setup.truth.height == 16);
  CHECK(setup.degraded.height == 16);
  CHECK(setup.problem.A.in_dim() == 256);
  CHECK(setup.problem.b == setup.degraded.pixels);
  REQUIRE(setup.problem.lambda_max_hint.has_value());
  CHECK(*setup.problem.lambda_max_hint > 0.0);
  CHECK(setup.problem.x0 == sik::SignalVector(256, 0.0));
  CHECK(setup.grid.iters_per_cell == 2);

  cfg.init = "atb";
  const sik::ExperimentSetup atb = sik::make_experiment(cfg);
  CHECK(atb.problem.x0 != sik::SignalVector(256, 0.0));
}
