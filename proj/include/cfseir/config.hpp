#pragma once

// Flat `key = value` run configuration.
//
//   # comment
//   alpha = 0.9
//   S0 = 100          uniform initial value of a compartment
//   S0(8,8) = 70      per-cell override, 0-based (ix, iy)
//
// A compartment's built-in initial condition is used only when no S0/E0/I0/R0
// key for that compartment appears; otherwise the document defines it fully
// (uniform value defaults to 0). Cell indices are 0-based, so the default seed
// cell (8, 8) is the centre of the 16 x 16 grid.

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "cfseir/caputo_fabrizio.hpp"
#include "cfseir/control.hpp"
#include "cfseir/errors.hpp"
#include "cfseir/grid.hpp"
#include "cfseir/seir.hpp"

namespace cfseir {

struct CellOverride {
  std::size_t ix = 0;
  std::size_t iy = 0;
  double value = 0.0;

  friend bool operator==(const CellOverride&, const CellOverride&) = default;
};

/// Uniform value plus per-cell overrides (later overrides of the same cell win).
struct InitialCondition {
  double uniform = 0.0;
  std::vector<CellOverride> cells;

  friend bool operator==(const InitialCondition&, const InitialCondition&) = default;
};

inline std::array<InitialCondition, kCompartments> default_initial_conditions() {
  return {InitialCondition{100.0, {{8, 8, 70.0}}}, InitialCondition{0.0, {{8, 8, 20.0}}},
          InitialCondition{0.0, {{8, 8, 10.0}}}, InitialCondition{0.0, {}}};
}

struct RunConfig {
  ModelParams model;
  double alpha = 1.0;
  double m_alpha = 1.0;
  GridSpec grid;
  double dt = 0.05;
  double T = 60.0;
  int corrector_passes = 2;
  std::array<InitialCondition, kCompartments> initial = default_initial_conditions();
  FbsConfig fbs;
  std::string out_dir = "out";
  std::size_t save_every = 20;

  FractionalParams fractional() const { return FractionalParams(alpha, m_alpha); }

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

  SeirState initial_state() const {
    SeirState w(grid);
    for (std::size_t c = 0; c < kCompartments; ++c) {
      w[c] = Field(grid, initial[c].uniform);
      for (const CellOverride& o : initial[c].cells) w[c](o.ix, o.iy) = o.value;
    }
    return w;
  }

  /// Throws ConfigError naming the offending key.
  void validate() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct ParsedConfig {
  RunConfig config;
  std::vector<std::string> notices;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(std::string(key), "cannot parse '" + std::string(text) + "' as a number");
  }
  if (!std::isfinite(v)) throw ConfigError(std::string(key), "value must be finite");
  return v;
}

inline long long parse_integer(std::string_view key, std::string_view text) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError(std::string(key), "cannot parse '" + std::string(text) + "' as an integer");
  }
  return v;
}

inline std::size_t parse_count(std::string_view key, std::string_view text) {
  const long long v = parse_integer(key, text);
  if (v < 0) throw ConfigError(std::string(key), "must be nonnegative");
  return static_cast<std::size_t>(v);
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(text) + "'");
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

inline int compartment_of(char c) {
  for (std::size_t k = 0; k < kCompartments; ++k) {
    if (kCompartmentNames[k][0] == c) return static_cast<int>(k);
  }
  return -1;
}

// "S0", "E0(3,4)" ... -> compartment and optional cell; false if not an initial-condition key.
inline bool parse_initial_key(std::string_view key, int& comp, bool& has_cell, std::size_t& ix, std::size_t& iy) {
  if (key.size() < 2 || key[1] != '0') return false;
  comp = compartment_of(key[0]);
  if (comp < 0) return false;
  if (key.size() == 2) {
    has_cell = false;
    return true;
  }
  if (key[2] != '(' || key.back() != ')') return false;
  const std::string_view inner = key.substr(3, key.size() - 4);
  const auto comma = inner.find(',');
  if (comma == std::string_view::npos) return false;
  const std::string_view a = trim(inner.substr(0, comma));
  const std::string_view b = trim(inner.substr(comma + 1));
  ix = parse_count(key, a);
  iy = parse_count(key, b);
  has_cell = true;
  return true;
}

}  // namespace detail

inline void RunConfig::validate() const {
  try {
    model.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.substr(0, msg.find(' ')), msg);
  }
  if (model.beta > model.xi) throw ConfigError("beta", "beta <= xi required (births may not exceed deaths)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha", "must lie in (0, 1]");
  try {
    (void)fractional();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("m_alpha", e.what());
  }
  if (grid.nx < 3) throw ConfigError("nx", "need at least 3 cells");
  if (grid.ny < 3) throw ConfigError("ny", "need at least 3 cells");
  if (!(grid.dx > 0.0)) throw ConfigError("dx", "must be positive");
  if (!(grid.dy > 0.0)) throw ConfigError("dy", "must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt", "must be positive");
  if (!(T > 0.0)) throw ConfigError("T", "must be positive");
  const double n = T / dt;
  if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) throw ConfigError("T", "must be a multiple of dt");
  if (corrector_passes < 0) throw ConfigError("corrector_passes", "must be nonnegative");
  if (!(fbs.tol > 0.0)) throw ConfigError("tol", "must be positive");
  if (fbs.max_iter < 1) throw ConfigError("max_iter", "must be at least 1");
  if (!(fbs.relax_w > 0.0 && fbs.relax_w <= 1.0)) throw ConfigError("relax_w", "must lie in (0, 1]");
  if (!(fbs.min_relax_w > 0.0 && fbs.min_relax_w <= fbs.relax_w)) {
    throw ConfigError("min_relax_w", "must lie in (0, relax_w]");
  }
  if (save_every < 1) throw ConfigError("save_every", "must be at least 1");
  if (out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
  for (std::size_t c = 0; c < kCompartments; ++c) {
    const std::string key = std::string(kCompartmentNames[c]) + "0";
    if (!(initial[c].uniform >= 0.0)) throw ConfigError(key, "initial values must be nonnegative");
    for (const CellOverride& o : initial[c].cells) {
      if (o.ix >= grid.nx || o.iy >= grid.ny) throw ConfigError(key, "cell outside the grid");
      if (!(o.value >= 0.0)) throw ConfigError(key, "initial values must be nonnegative");
    }
  }
}

/// Parses and validates a configuration document. Absent keys keep their
/// defaults; a missing sigma is reported through `notices`.
inline ParsedConfig parse_config(std::string_view text) {
  ParsedConfig out;
  RunConfig& cfg = out.config;
  std::array<bool, kCompartments> ic_seen{};
  bool sigma_seen = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    auto num = [&] { return detail::parse_double(key, value); };

    int comp = 0;
    bool has_cell = false;
    std::size_t ix = 0;
    std::size_t iy = 0;
    if (detail::parse_initial_key(key, comp, has_cell, ix, iy)) {
      InitialCondition& ic = cfg.initial[static_cast<std::size_t>(comp)];
      if (!ic_seen[static_cast<std::size_t>(comp)]) {
        ic = InitialCondition{};
        ic_seen[static_cast<std::size_t>(comp)] = true;
      }
      if (has_cell) {
        ic.cells.push_back({ix, iy, num()});
      } else {
        ic.uniform = num();
      }
      continue;
    }

    if (key == "beta") cfg.model.beta = num();
    else if (key == "kappa") cfg.model.kappa = num();
    else if (key == "mu") cfg.model.mu = num();
    else if (key == "xi") cfg.model.xi = num();
    else if (key == "eta") cfg.model.eta = num();
    else if (key.size() == 7 && key.starts_with("lambda") && key[6] >= '1' && key[6] <= '4') {
      cfg.model.lambda[static_cast<std::size_t>(key[6] - '1')] = num();
    } else if (key == "lambda") cfg.model.lambda.fill(num());
    else if (key == "sigma") {
      cfg.model.sigma = num();
      sigma_seen = true;
    } else if (key == "alpha") cfg.alpha = num();
    else if (key == "m_alpha") cfg.m_alpha = num();
    else if (key == "nx") cfg.grid.nx = detail::parse_count(key, value);
    else if (key == "ny") cfg.grid.ny = detail::parse_count(key, value);
    else if (key == "dx") cfg.grid.dx = num();
    else if (key == "dy") cfg.grid.dy = num();
    else if (key == "dt") cfg.dt = num();
    else if (key == "T") cfg.T = num();
    else if (key == "corrector_passes") cfg.corrector_passes = static_cast<int>(detail::parse_integer(key, value));
    else if (key == "tol") cfg.fbs.tol = num();
    else if (key == "max_iter") cfg.fbs.max_iter = static_cast<int>(detail::parse_integer(key, value));
    else if (key == "relax_w") cfg.fbs.relax_w = num();
    else if (key == "min_relax_w") cfg.fbs.min_relax_w = num();
    else if (key == "adaptive_relax") cfg.fbs.adaptive_relax = detail::parse_bool(key, value);
    else if (key == "err_aggregate") {
      if (value == "max") cfg.fbs.aggregate = ErrAggregate::kMax;
      else if (value == "min") cfg.fbs.aggregate = ErrAggregate::kMin;
      else throw ConfigError(key, "expected max or min, got '" + std::string(value) + "'");
    } else if (key == "out_dir") {
      cfg.out_dir = std::string(value);
    } else if (key == "save_every") cfg.save_every = detail::parse_count(key, value);
    else throw ConfigError(key, "unknown key");
  }

  if (!sigma_seen) out.notices.push_back("sigma not given; using default sigma = " + detail::format_double(cfg.model.sigma));
  cfg.validate();
  return out;
}

/// Writes every key, so parse_config(serialize_config(c)).config == c.
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream os;
  auto put = [&](const char* key, double v) { os << key << " = " << detail::format_double(v) << '\n'; };
  put("beta", cfg.model.beta);
  put("kappa", cfg.model.kappa);
  put("mu", cfg.model.mu);
  put("xi", cfg.model.xi);
  put("eta", cfg.model.eta);
  for (std::size_t k = 0; k < kCompartments; ++k) {
    os << "lambda" << k + 1 << " = " << detail::format_double(cfg.model.lambda[k]) << '\n';
  }
  put("sigma", cfg.model.sigma);
  put("alpha", cfg.alpha);
  put("m_alpha", cfg.m_alpha);
  os << "nx = " << cfg.grid.nx << "\nny = " << cfg.grid.ny << '\n';
  put("dx", cfg.grid.dx);
  put("dy", cfg.grid.dy);
  put("dt", cfg.dt);
  put("T", cfg.T);
  os << "corrector_passes = " << cfg.corrector_passes << '\n';
  put("tol", cfg.fbs.tol);
  os << "max_iter = " << cfg.fbs.max_iter << '\n';
  put("relax_w", cfg.fbs.relax_w);
  put("min_relax_w", cfg.fbs.min_relax_w);
  os << "adaptive_relax = " << (cfg.fbs.adaptive_relax ? "true" : "false") << '\n';
  os << "err_aggregate = " << (cfg.fbs.aggregate == ErrAggregate::kMax ? "max" : "min") << '\n';
  os << "out_dir = " << cfg.out_dir << '\n';
  os << "save_every = " << cfg.save_every << '\n';
  for (std::size_t c = 0; c < kCompartments; ++c) {
    os << kCompartmentNames[c] << "0 = " << detail::format_double(cfg.initial[c].uniform) << '\n';
    for (const CellOverride& o : cfg.initial[c].cells) {
      os << kCompartmentNames[c] << "0(" << o.ix << ',' << o.iy << ") = " << detail::format_double(o.value) << '\n';
    }
  }
  return os.str();
}

}  // namespace cfseir
