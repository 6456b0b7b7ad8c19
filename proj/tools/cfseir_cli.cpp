// cfseir: simulate, optimize, sweep and verify the CF-fractional SEIR control model.
//
// Exit codes: 0 success, 1 usage / configuration / output error, 2 solver
// failure, 3 verification failure. CFSEIR_THREADS caps concurrent sweep runs.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cfseir/config.hpp"
#include "cfseir/errors.hpp"
#include "cfseir/io.hpp"
#include "cfseir/runner.hpp"
#include "cfseir/verification.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kSolver = 2, kVerify = 3 };

struct Overrides {
  std::string config_path;
  std::string out_dir;
  std::optional<double> alpha;
  std::optional<double> dt;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::size_t> save_every;
  std::string alphas = "0.8,0.9,1";
  bool no_control = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cfseir::ConfigError("--config", "cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

cfseir::RunConfig load_config(const Overrides& o) {
  const std::string text = o.config_path.empty() ? std::string() : read_file(o.config_path);
  cfseir::ParsedConfig parsed = cfseir::parse_config(text);
  for (const std::string& note : parsed.notices) std::cerr << "note: " << note << '\n';
  cfseir::RunConfig& cfg = parsed.config;
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.dt) cfg.dt = *o.dt;
  if (o.tol) cfg.fbs.tol = *o.tol;
  if (o.max_iter) cfg.fbs.max_iter = *o.max_iter;
  if (o.save_every) cfg.save_every = *o.save_every;
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  cfg.validate();
  return cfg;
}

std::vector<double> parse_alphas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(cfseir::detail::parse_double("--alphas", cfseir::detail::trim(item)));
  if (out.empty()) throw cfseir::ConfigError("--alphas", "need at least one value");
  return out;
}

unsigned sweep_threads() {
  if (const char* env = std::getenv("CFSEIR_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void log_line(const std::string& s) { std::cerr << s << '\n'; }

void print_outcome(const cfseir::RunOutcome& r) {
  std::cout << "alpha " << cfseir::format_number(r.alpha) << ": J = " << cfseir::format_number(r.objective.total)
            << ", corner arrival step "
            << (r.arrival ? std::to_string(*r.arrival) : std::string("none")) << ", theta "
            << cfseir::format_number(r.theta);
  if (r.controlled) {
    std::cout << ", " << r.iterations << " sweeps, " << (r.converged ? "converged" : "NOT converged");
  }
  std::cout << " -> " << r.dir.string() << '\n';
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Configuration file (key = value lines)");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--dt", o.dt, "Time step in days");
  cmd->add_option("--save-every", o.save_every, "Frame stride in steps");
}

void add_fbs(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--tol", o.tol, "Sweep tolerance on Err");
  cmd->add_option("--max-iter", o.max_iter, "Sweep iteration cap");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal vaccination control of a CF-fractional spatial SEIR model"};
  app.require_subcommand(1);
  Overrides o;

  CLI::App* simulate = app.add_subcommand("simulate", "Uncontrolled forward run (u = 0)");
  add_common(simulate, o);
  simulate->add_option("--alpha", o.alpha, "Fractional order in (0, 1]");

  CLI::App* optimize = app.add_subcommand("optimize", "Forward-backward sweep for the optimal control");
  add_common(optimize, o);
  add_fbs(optimize, o);
  optimize->add_option("--alpha", o.alpha, "Fractional order in (0, 1]");

  CLI::App* sweep = app.add_subcommand("sweep", "Repeat a run for several fractional orders");
  add_common(sweep, o);
  add_fbs(sweep, o);
  sweep->add_option("--alphas", o.alphas, "Comma-separated orders")->capture_default_str();
  sweep->add_flag("--no-control", o.no_control, "Simulate with u = 0 instead of optimizing");

  CLI::App* verify = app.add_subcommand("verify", "Run the acceptance checks");
  verify->add_option("--out", o.out_dir, "Scratch directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (verify->parsed()) {
      const std::filesystem::path scratch =
          o.out_dir.empty() ? std::filesystem::temp_directory_path() / "cfseir_verify" : std::filesystem::path(o.out_dir);
      cfseir::ensure_directory(scratch);
      bool all = true;
      cfseir::run_acceptance(scratch, [&](const cfseir::CheckResult& r) {
        std::cout << cfseir::format_check(r) << std::endl;
        all = all && r.pass;
      });
      std::cout << (all ? "all checks passed" : "verification FAILED") << '\n';
      return all ? kOk : kVerify;
    }

    const cfseir::RunConfig cfg = load_config(o);
    if (simulate->parsed()) {
      print_outcome(cfseir::run_simulate(cfg, cfg.out_dir, log_line));
    } else if (optimize->parsed()) {
      print_outcome(cfseir::run_optimize(cfg, cfg.out_dir, log_line));
    } else if (sweep->parsed()) {
      const auto runs =
          cfseir::run_sweep(cfg, parse_alphas(o.alphas), cfg.out_dir, !o.no_control, sweep_threads(), log_line);
      for (const cfseir::RunOutcome& r : runs) print_outcome(r);
    }
    return kOk;
  } catch (const cfseir::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const cfseir::IoError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return kUsage;
  } catch (const cfseir::SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kSolver;
  }
}
