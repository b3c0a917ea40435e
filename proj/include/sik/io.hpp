// sik - Sparse Inverse Kit
// Copyright 2026 sik Contributors
// Licensed under Apache 2.0

#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include "sik/common.hpp"
#include "sik/harness.hpp"
#include "sik/simulation.hpp"

namespace sik {

class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed content in an input file; carries the 1-based line and column.
class parse_error : public std::runtime_error {
public:
  parse_error(const std::string& what, int line, int column)
      : std::runtime_error(what + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        line_(line),
        column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

private:
  int line_, column_;
};

/// Bad key or value in a run configuration; maps to the usage exit code.
class config_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double_token(std::string_view tok, int line, int column) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw parse_error("expected a number, got '" + std::string(tok) + "'", line, column);
  }
  return v;
}

// ---------------------------------------------------------------------------
// Image CSV: one line per pixel row, comma-separated decimals, LF endings.
// This is the lossless interchange format; PGM below is an 8-bit preview.

inline void write_image_csv(const std::string& path, const ImageGrid& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  std::string line;
  for (int i = 0; i < img.height; ++i) {
    line.clear();
    for (int j = 0; j < img.width; ++j) {
      if (j) line += ',';
      line += format_double(img.pixels[static_cast<std::size_t>(i) * img.width + j]);
    }
    line += '\n';
    f << line;
  }
  if (!f) throw io_error("write failed: " + path);
}

inline ImageGrid read_image_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  ImageGrid img;
  std::string raw;
  int line_no = 0;
  while (std::getline(f, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty() && f.peek() == std::char_traits<char>::eof()) break;
    int width = 0;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = raw.find(',', pos);
      std::string_view tok(raw.data() + pos, (comma == std::string::npos ? raw.size() : comma) - pos);
      img.pixels.push_back(parse_double_token(tok, line_no, static_cast<int>(pos) + 1));
      ++width;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (img.width == 0) {
      img.width = width;
    } else if (width != img.width) {
      throw parse_error("ragged row: expected " + std::to_string(img.width) + " values, got " +
                            std::to_string(width),
                        line_no, 1);
    }
    ++img.height;
  }
  if (img.height == 0 || img.width == 0) throw parse_error("empty image", 1, 1);
  return img;
}

// ---------------------------------------------------------------------------
// PGM: binary P5, maxval 255, linear min-max scaling. Lossy by construction.

struct PgmScale {
  double lo = 0.0, hi = 0.0;
};

inline PgmScale write_pgm(const std::string& path, const ImageGrid& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  auto [lo, hi] = img.value_range();
  const double span = hi - lo;
  f << "P5\n" << img.width << ' ' << img.height << "\n255\n";
  std::string bytes(img.pixels.size(), '\0');
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    double t = span > 0.0 ? (img.pixels[i] - lo) / span : 0.0;
    bytes[i] = static_cast<char>(static_cast<unsigned char>(std::lround(t * 255.0)));
  }
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw io_error("write failed: " + path);
  return {lo, hi};
}

inline ImageGrid read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  auto next_token = [&](int& line) {
    std::string tok;
    int ch;
    while ((ch = f.get()) != EOF) {
      if (ch == '#') {
        while ((ch = f.get()) != EOF && ch != '\n') {}
        ++line;
        continue;
      }
      if (ch == '\n') {
        ++line;
        continue;
      }
      if (std::isspace(ch)) continue;
      tok.push_back(static_cast<char>(ch));
      while ((ch = f.get()) != EOF && !std::isspace(ch)) tok.push_back(static_cast<char>(ch));
      if (ch == '\n') ++line;
      break;
    }
    return tok;
  };
  int line = 1;
  if (next_token(line) != "P5") throw parse_error("not a binary PGM (P5)", 1, 1);
  const std::string ws = next_token(line), hs = next_token(line), ms = next_token(line);
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(ws);
    h = std::stoi(hs);
    maxval = std::stoi(ms);
  } catch (const std::exception&) {
    throw parse_error("bad PGM header", line, 1);
  }
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) {
    throw parse_error("unsupported PGM header", line, 1);
  }
  std::string bytes(static_cast<std::size_t>(w) * h, '\0');
  f.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (f.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw parse_error("truncated PGM payload", line, 1);
  }
  ImageGrid img{h, w, std::vector<double>(bytes.size())};
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    img.pixels[i] = static_cast<double>(static_cast<unsigned char>(bytes[i])) / maxval;
  }
  return img;
}

/// Dispatches on extension: .csv (lossless) or .pgm (8-bit).
inline ImageGrid read_image_any(const std::string& path) {
  auto ends_with = [&](std::string_view suf) {
    return path.size() >= suf.size() &&
           path.compare(path.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends_with(".csv")) return read_image_csv(path);
  if (ends_with(".pgm")) return read_pgm(path);
  throw io_error("unsupported image extension (want .csv or .pgm): " + path);
}

// ---------------------------------------------------------------------------
// Trace / results / profiles CSV. pin_timings writes wall_ms as 0 so files
// are byte-reproducible across runs.

inline void write_trace_csv(const std::string& path, const IterationTrace& trace,
                            bool pin_timings = false) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << "iter,cost,fidelity,mae,wall_ms\n";
  for (const auto& r : trace) {
    f << r.iter << ',' << format_double(r.cost) << ',' << format_double(r.fidelity) << ',';
    if (r.mae) f << format_double(*r.mae);
    f << ',' << format_double(pin_timings ? 0.0 : r.wall_ms) << '\n';
  }
  if (!f) throw io_error("write failed: " + path);
}

inline void write_results_csv(const std::string& path, const ExperimentResult& result,
                              bool pin_timings = false) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << "strategy,beta,gamma,delta,final_mae,diverged,wall_ms\n";
  for (const auto& c : result.cells) {
    f << to_string(c.strategy) << ',' << format_double(c.beta) << ',';
    if (c.gamma) f << format_double(*c.gamma);
    f << ',';
    if (c.delta) f << format_double(*c.delta);
    f << ',' << format_double(c.final_mae) << ',' << (c.diverged ? 1 : 0) << ','
      << format_double(pin_timings ? 0.0 : c.wall_ms) << '\n';
  }
  if (!f) throw io_error("write failed: " + path);
}

inline void write_profiles_csv(const std::string& path, const Profiles& profiles) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open for writing: " + path);
  f << "axis,index,value\n";
  for (std::size_t j = 0; j < profiles.central_row.size(); ++j) {
    f << "row," << j << ',' << format_double(profiles.central_row[j]) << '\n';
  }
  for (std::size_t i = 0; i < profiles.central_col.size(); ++i) {
    f << "col," << i << ',' << format_double(profiles.central_col[i]) << '\n';
  }
  if (!f) throw io_error("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Sweep run configuration: flat `key = value` lines, '#' comments, list
// values comma-separated. Defaults give the desk-scale preset.

struct SweepFileConfig {
  int phantom_size = 64;
  // High-contrast variant: at desk scale the low-contrast table degenerates
  // (the all-zero image outscores every restoration on MAE).
  PhantomVariant phantom_variant = PhantomVariant::modified;
  double sigma = 1e-2;
  int kernel = 5;
  Boundary boundary = Boundary::circular;
  std::uint64_t noise_seed = 7;
  int levels = 2;
  std::string init = "zero";  // zero | atb
  int iters = 30;
  double p = 0.5;
  int workers = 0;  // 0 = hardware concurrency
  std::vector<Strategy> strategies{Strategy::ista, Strategy::eriwsta, Strategy::irl1,
                                   Strategy::wlp, Strategy::nw4};
  std::vector<double> beta{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2};
  std::vector<double> gamma{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2};
  std::vector<double> delta{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::uint64_t solver_seed = 1;
  double step_safety = 1.01;
  bool pin_timings = false;
  int trace_stride = 1;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    std::size_t comma = v.find(',', pos);
    if (comma == std::string::npos) comma = v.size();
    std::string item = trim(std::string_view(v).substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

}  // namespace detail

inline SweepFileConfig parse_sweep_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open: " + path);
  SweepFileConfig cfg;
  std::string raw;
  int line_no = 0;

  auto as_int = [&](const std::string& key, const std::string& v) {
    try {
      return std::stoi(v);
    } catch (const std::exception&) {
      throw config_error("bad integer for key '" + key + "' (line " + std::to_string(line_no) + ")");
    }
  };
  auto as_double = [&](const std::string& key, const std::string& v) {
    double d = 0.0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), d);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
      throw config_error("bad number for key '" + key + "' (line " + std::to_string(line_no) + ")");
    }
    return d;
  };
  auto as_double_list = [&](const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : detail::split_list(v)) out.push_back(as_double(key, item));
    if (out.empty()) {
      throw config_error("empty list for key '" + key + "' (line " + std::to_string(line_no) + ")");
    }
    return out;
  };

  while (std::getline(f, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::string stripped = detail::trim(raw);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw config_error("expected 'key = value' (line " + std::to_string(line_no) + ")");
    }
    const std::string key = detail::trim(std::string_view(stripped).substr(0, eq));
    const std::string val = detail::trim(std::string_view(stripped).substr(eq + 1));

    if (key == "phantom_size") {
      cfg.phantom_size = as_int(key, val);
    } else if (key == "phantom_variant") {
      if (val == "standard") cfg.phantom_variant = PhantomVariant::standard;
      else if (val == "modified") cfg.phantom_variant = PhantomVariant::modified;
      else throw config_error("bad phantom_variant '" + val + "' (line " + std::to_string(line_no) + ")");
    } else if (key == "sigma") {
      cfg.sigma = as_double(key, val);
    } else if (key == "kernel") {
      cfg.kernel = as_int(key, val);
    } else if (key == "boundary") {
      if (val == "zero_pad") cfg.boundary = Boundary::zero_pad;
      else if (val == "replicate") cfg.boundary = Boundary::replicate;
      else if (val == "circular") cfg.boundary = Boundary::circular;
      else throw config_error("bad boundary '" + val + "' (line " + std::to_string(line_no) + ")");
    } else if (key == "noise_seed") {
      cfg.noise_seed = static_cast<std::uint64_t>(std::stoull(val));
    } else if (key == "levels") {
      cfg.levels = as_int(key, val);
    } else if (key == "init") {
      if (val != "zero" && val != "atb") {
        throw config_error("bad init '" + val + "' (line " + std::to_string(line_no) + ")");
      }
      cfg.init = val;
    } else if (key == "iters") {
      cfg.iters = as_int(key, val);
    } else if (key == "p") {
      cfg.p = as_double(key, val);
    } else if (key == "workers") {
      cfg.workers = as_int(key, val);
    } else if (key == "strategies") {
      cfg.strategies.clear();
      for (const auto& item : detail::split_list(val)) {
        auto s = strategy_from_string(item);
        if (!s) throw config_error("unknown strategy '" + item + "' (line " + std::to_string(line_no) + ")");
        cfg.strategies.push_back(*s);
      }
      if (cfg.strategies.empty()) {
        throw config_error("empty list for key 'strategies' (line " + std::to_string(line_no) + ")");
      }
    } else if (key == "beta") {
      cfg.beta = as_double_list(key, val);
    } else if (key == "gamma") {
      cfg.gamma = as_double_list(key, val);
    } else if (key == "delta") {
      cfg.delta = as_double_list(key, val);
    } else if (key == "solver_seed") {
      cfg.solver_seed = static_cast<std::uint64_t>(std::stoull(val));
    } else if (key == "step_safety") {
      cfg.step_safety = as_double(key, val);
    } else if (key == "pin_timings") {
      if (val == "true" || val == "1") cfg.pin_timings = true;
      else if (val == "false" || val == "0") cfg.pin_timings = false;
      else throw config_error("bad boolean for key 'pin_timings' (line " + std::to_string(line_no) + ")");
    } else if (key == "trace_stride") {
      cfg.trace_stride = as_int(key, val);
    } else {
      throw config_error("unknown key '" + key + "' (line " + std::to_string(line_no) + ")");
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Experiment assembly shared by the CLI and the verification suites.

struct ExperimentSetup {
  ImageGrid truth;
  ImageGrid degraded;
  SweepProblem problem;
  SweepGrid grid;
};

/// Builds the full desk pipeline: phantom -> degraded observation ->
/// A = blur o Haar-synthesis, with the spectral bound precomputed once so
/// every sweep cell shares it.
inline ExperimentSetup make_experiment(const SweepFileConfig& cfg) {
  ImageGrid truth = shepp_logan(cfg.phantom_size, cfg.phantom_size, cfg.phantom_variant);
  ImageGrid degraded =
      degrade(truth, DegradationSpec{cfg.kernel, cfg.boundary, cfg.sigma, cfg.noise_seed});

  LinearOperator blur = make_blur_operator(cfg.phantom_size, cfg.phantom_size, cfg.kernel, cfg.boundary);
  LinearOperator synthesis = make_haar_operator(cfg.phantom_size, cfg.phantom_size, cfg.levels);
  LinearOperator A = compose(blur, synthesis);

  SpectralBound bound = estimate_spectral_bound(A, 1e-9, 10000, cfg.solver_seed);

  SignalVector x0 = cfg.init == "atb" ? A.adjoint(degraded.pixels) : SignalVector(A.in_dim(), 0.0);
  SweepProblem problem{std::move(A),          std::move(synthesis), degraded.pixels,
                       cfg.phantom_size,      cfg.phantom_size,     std::move(x0),
                       bound.value,           cfg.step_safety,      cfg.solver_seed};
  SweepGrid grid{cfg.strategies, cfg.beta, cfg.gamma, cfg.delta, cfg.iters, cfg.p};
  return ExperimentSetup{std::move(truth), std::move(degraded), std::move(problem), std::move(grid)};
}

}  // namespace sik
