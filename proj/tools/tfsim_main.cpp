#include "tfsim/circuit.hpp"
#include "tfsim/dispmat.hpp"
#include "tfsim/expm.hpp"
#include "tfsim/fock.hpp"
#include "tfsim/io.hpp"
#include "tfsim/metrics.hpp"
#include "tfsim/sweep.hpp"
#include "tfsim/tame.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <complex>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

using namespace tfsim;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNoSolution = 3;
constexpr int kExitNumericGuard = 4;

/// Accepts "1.5", "3-2i", "3,-2", "0+1i".
Complex parse_complex(const std::string& text) {
  std::string s = text;
  const auto comma = s.find(',');
  if (comma != std::string::npos) {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  }
  if (!s.empty() && (s.back() == 'i' || s.back() == 'I')) {
    s.pop_back();
    // split at the last +/- that is not an exponent sign or leading sign
    for (size_t p = s.size(); p-- > 1;) {
      if ((s[p] == '+' || s[p] == '-') && s[p - 1] != 'e' && s[p - 1] != 'E') {
        return {std::stod(s.substr(0, p)),
                std::stod(s[p] == '+' ? s.substr(p + 1) : s.substr(p))};
      }
    }
    return {0.0, std::stod(s)};
  }
  return {std::stod(s), 0.0};
}

sweep::GridRange parse_range(const std::string& text) {
  sweep::GridRange r;
  if (std::sscanf(text.c_str(), "%lf:%lf:%d", &r.lo, &r.hi, &r.count) != 3)
    throw CLI::ValidationError("range must be lo:hi:count, got '" + text + "'");
  return r;
}

void load_config_file(const std::string& path, sweep::SweepConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("cannot open config file " + path);
  nlohmann::json j;
  in >> j;
  auto range = [](const nlohmann::json& v) {
    return sweep::GridRange{v.at(0).get<Real>(), v.at(1).get<Real>(), v.at(2).get<int>()};
  };
  if (j.contains("gamma_range")) cfg.gamma_range = range(j["gamma_range"]);
  if (j.contains("xi_range")) cfg.xi_range = range(j["xi_range"]);
  if (j.contains("etas")) cfg.etas = j["etas"].get<std::vector<Real>>();
  if (j.contains("detectors")) {
    cfg.detectors.clear();
    for (const auto& d : j["detectors"])
      cfg.detectors.push_back(circuit::PovmDescriptor::parse(d.get<std::string>()));
  }
  if (j.contains("d0")) cfg.d0 = j["d0"].get<int>();
  if (j.contains("d1")) cfg.d1 = j["d1"].get<int>();
  if (j.contains("epsilon0")) cfg.epsilon0 = j["epsilon0"].get<Real>();
  if (j.contains("epsilon1")) cfg.epsilon1 = j["epsilon1"].get<Real>();
  if (j.contains("targets")) cfg.targets = j["targets"].get<std::vector<Real>>();
  if (j.contains("bins")) cfg.bins = j["bins"].get<int>();
  if (j.contains("output_path")) cfg.output_path = j["output_path"].get<std::string>();
  if (j.contains("parallelism")) cfg.parallelism = j["parallelism"].get<int>();
  if (j.contains("probe_dim")) cfg.probe_dim = j["probe_dim"].get<int>();
  if (j.contains("cache_path")) cfg.cache_path = j["cache_path"].get<std::string>();
}

int run(int argc, char** argv) {
  CLI::App app{"Truncated Fock-space simulation of conditional state preparation"};
  app.require_subcommand(1);

  // ---- find-dim ----
  auto* find_dim = app.add_subcommand("find-dim", "Working-dimension search for TAME");
  std::string fd_xi = "1";
  int fd_d0 = 70;
  Real fd_eps1 = 1e-13, fd_h = 10.0;
  std::string fd_cache = "d1-cache.txt";
  find_dim->add_option("--xi", fd_xi, "displacement amplitude (e.g. 1, 3-2i)");
  find_dim->add_option("--d0", fd_d0, "target dimension")->required();
  find_dim->add_option("--epsilon1", fd_eps1, "match tolerance");
  find_dim->add_option("--depth", fd_h, "search depth factor h");
  find_dim->add_option("--cache", fd_cache, "d1 cache file ('' disables)");

  // ---- find-d0 ----
  auto* find_d0_cmd = app.add_subcommand("find-d0", "Fock-space dimension from the cutoff-error criterion");
  Real f0_gamma = 1.0, f0_xi = 1.0, f0_eps0 = 1e-13;
  int f0_probe = 200, f0_max = 0;
  find_d0_cmd->add_option("--gamma-star", f0_gamma, "largest squeezing in the study");
  find_d0_cmd->add_option("--xi-star", f0_xi, "largest displacement in the study");
  find_d0_cmd->add_option("--epsilon0", f0_eps0, "cutoff-error threshold");
  find_d0_cmd->add_option("--probe-dim", f0_probe, "probe displacement dimension");
  find_d0_cmd->add_option("--max-d0", f0_max, "candidate cap (default probe/2)");

  // ---- build-disp ----
  auto* build = app.add_subcommand("build-disp", "Construct a displacement matrix and its diagnostics");
  std::string b_xi = "1", b_method = "tame", b_out = "displacement.dmat";
  int b_dim = 70, b_d1 = 0;
  build->add_option("--xi", b_xi, "displacement amplitude")->required();
  build->add_option("--dim", b_dim, "matrix dimension")->required();
  build->add_option("--method", b_method, "closed|recurrent|tame|expm")
      ->check(CLI::IsMember({"closed", "recurrent", "tame", "expm"}));
  build->add_option("--d1", b_d1, "TAME working dimension (default: searched)");
  build->add_option("--out", b_out, "output matrix path");

  // ---- verify ----
  auto* verify = app.add_subcommand("verify", "Error-matrix statistics for a stored matrix");
  std::string v_in, v_out = "", v_xi = "";
  verify->add_option("--in", v_in, "matrix file")->required();
  verify->add_option("--xi", v_xi, "override amplitude (default: from file)");
  verify->add_option("--out", v_out, "per-column stats CSV (default: stdout summary)");

  // ---- norms ----
  auto* norms = app.add_subcommand("norms", "Column norms per construction method");
  std::string n_xi = "3-2i", n_out = "norms.csv";
  int n_dim = 101, n_d1 = 0;
  norms->add_option("--xi", n_xi, "displacement amplitude");
  norms->add_option("--dim", n_dim, "matrix dimension");
  norms->add_option("--d1", n_d1, "TAME working dimension (default: searched)");
  norms->add_option("--out", n_out, "output CSV");

  // ---- sweep ----
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid sweep over (gamma, xi) x scenarios");
  sweep::SweepConfig cfg;
  std::string s_config, s_gamma, s_xi;
  std::vector<std::string> s_etas, s_dets, s_targets;
  bool s_desk = false;
  int s_jobs = 0;
  sweep_cmd->add_option("--config", s_config, "JSON config file (flags override)");
  sweep_cmd->add_option("--gamma-range", s_gamma, "lo:hi:count");
  sweep_cmd->add_option("--xi-range", s_xi, "lo:hi:count");
  sweep_cmd->add_option("--eta", s_etas, "transmission efficiency (repeatable)");
  sweep_cmd->add_option("--detector", s_dets, "fock:N | apd | cascade:M:N (repeatable)");
  sweep_cmd->add_option("--epsilon0", cfg.epsilon0, "cutoff-error threshold");
  sweep_cmd->add_option("--epsilon1", cfg.epsilon1, "dimension-search tolerance");
  sweep_cmd->add_option("--bins", cfg.bins, "default reduction bin count");
  sweep_cmd->add_flag("--desk", s_desk, "101x101 desk-scale grid preset");
  sweep_cmd->add_option("--jobs", s_jobs, "worker threads (default: hardware)");
  sweep_cmd->add_option("--out", cfg.output_path, "records CSV path");
  sweep_cmd->add_option("--d0", cfg.d0, "Fock dimension override");
  sweep_cmd->add_option("--d1", cfg.d1, "TAME working dimension override");
  sweep_cmd->add_option("--target", s_targets, "fidelity target angle theta (repeatable)");
  sweep_cmd->add_option("--probe-dim", cfg.probe_dim, "find-d0 probe dimension");
  sweep_cmd->add_option("--cache", cfg.cache_path, "d1 cache file");

  // ---- reduce ----
  auto* reduce = app.add_subcommand("reduce", "Bin records or compute relative improvement");
  std::string r_in, r_out = "reduction.csv", r_metric = "m", r_baseline = "apd";
  int r_bins = 200, r_target = 0;
  bool r_improvement = false;
  reduce->add_option("--in", r_in, "records CSV")->required();
  reduce->add_option("--out", r_out, "output CSV");
  reduce->add_option("--metric", r_metric, "m | fidelity")
      ->check(CLI::IsMember({"m", "fidelity"}));
  reduce->add_option("--bins", r_bins, "bin count for the M reduction");
  reduce->add_option("--target-index", r_target, "fidelity target column index");
  reduce->add_flag("--improvement", r_improvement, "emit L relative to the baseline detector");
  reduce->add_option("--baseline", r_baseline, "baseline detector for L");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help text or the parse error
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (find_dim->parsed()) {
    const Complex xi = parse_complex(fd_xi);
    tame::TameConfig tc{fd_d0, fd_eps1, fd_h};
    int d1;
    if (!fd_cache.empty()) {
      tame::DimensionCache cache(fd_cache);
      d1 = tame::find_dimension_cached(xi, tc, cache);
    } else {
      d1 = tame::find_dimension(xi, tc);
    }
    std::printf("d1 %d\n", d1);
    return kExitOk;
  }

  if (find_d0_cmd->parsed()) {
    const int d0 = circuit::find_d0(f0_gamma, f0_xi, f0_eps0, f0_probe, f0_max);
    std::printf("d0 %d\n", d0);
    return kExitOk;
  }

  if (build->parsed()) {
    const Complex xi = parse_complex(b_xi);
    TruncatedOperator op;
    dispmat::GuardReport guard;
    if (b_method == "closed") {
      std::tie(op, guard) = dispmat::displacement_closed_form(xi, b_dim);
    } else if (b_method == "recurrent") {
      op = dispmat::displacement_recurrent(xi, b_dim);
    } else if (b_method == "expm") {
      op = expm(tame::displacement_generator(xi, b_dim));
    } else {
      int d1 = b_d1;
      if (d1 == 0) d1 = tame::find_dimension(xi, tame::TameConfig{b_dim, 1e-13, 10.0});
      op = tame::tame_build(xi, d1, b_dim);
    }
    io::write_matrix(b_out, op, xi);
    io::write_guard_report(b_out + ".guard.json", guard);
    if (b_dim >= 2) {
      const auto [e, stats] = tame::error_matrix(op, xi);
      io::write_error_stats_csv(b_out + ".estats.csv", stats);
    }
    std::printf("wrote %s (provenance %s, guards: %zu under / %zu over / %zu invalid)\n",
                b_out.c_str(), to_string(op.provenance), guard.underflow_cells.size(),
                guard.overflow_cells.size(), guard.invalid_cells.size());
    return kExitOk;
  }

  if (verify->parsed()) {
    const io::LoadedMatrix loaded = io::read_matrix(v_in);
    Complex xi;
    if (!v_xi.empty())
      xi = parse_complex(v_xi);
    else if (loaded.xi)
      xi = *loaded.xi;
    else
      throw CLI::ValidationError("matrix file carries no xi; pass --xi");
    const auto [e, stats] = tame::error_matrix(loaded.op, xi);
    if (!v_out.empty()) io::write_error_stats_csv(v_out, stats);
    std::printf("columns %d  mean(log10|E|) max %.3f  global max(log10|E|) %.3f\n",
                loaded.op.dim, stats.col_mean.maxCoeff(), stats.col_max.maxCoeff());
    return kExitOk;
  }

  if (norms->parsed()) {
    const Complex xi = parse_complex(n_xi);
    const auto [closed, guard] = dispmat::displacement_closed_form(xi, n_dim);
    const TruncatedOperator recur = dispmat::displacement_recurrent(xi, n_dim);
    int d1 = n_d1;
    if (d1 == 0) d1 = tame::find_dimension(xi, tame::TameConfig{n_dim, 1e-13, 10.0});
    const TruncatedOperator tame_op = tame::tame_build(xi, d1, n_dim);
    const TruncatedOperator plain = expm(tame::displacement_generator(xi, n_dim));
    io::write_norms_csv(n_out, {"closed_form", "recurrent", "tame", "plain_expm"},
                        {fock::column_norms(closed), fock::column_norms(recur),
                         fock::column_norms(tame_op), fock::column_norms(plain)});
    std::printf("wrote %s (d1 = %d, closed-form guards: %zu)\n", n_out.c_str(), d1,
                guard.underflow_cells.size() + guard.overflow_cells.size());
    return kExitOk;
  }

  if (sweep_cmd->parsed()) {
    if (!s_config.empty()) load_config_file(s_config, cfg);
    if (!s_gamma.empty()) cfg.gamma_range = parse_range(s_gamma);
    if (!s_xi.empty()) cfg.xi_range = parse_range(s_xi);
    if (!s_etas.empty()) {
      cfg.etas.clear();
      for (const auto& e : s_etas) cfg.etas.push_back(std::stod(e));
    }
    if (!s_dets.empty()) {
      cfg.detectors.clear();
      for (const auto& d : s_dets) cfg.detectors.push_back(circuit::PovmDescriptor::parse(d));
    }
    if (!s_targets.empty()) {
      cfg.targets.clear();
      for (const auto& t : s_targets) cfg.targets.push_back(std::stod(t));
    }
    if (s_desk) cfg.gamma_range.count = cfg.xi_range.count = 101;
    cfg.parallelism = s_jobs > 0 ? s_jobs : int(std::thread::hardware_concurrency());
    if (cfg.parallelism < 1) cfg.parallelism = 1;
    const sweep::SweepResult res = sweep::run_sweep(cfg);
    std::printf("d0 %d  d1 %d  records %zu  computed %ld  tame builds %ld  -> %s\n",
                res.d0, res.d1, res.records.size(), res.computed, res.tame_builds,
                cfg.output_path.c_str());
    return kExitOk;
  }

  if (reduce->parsed()) {
    int nt = 0;
    const auto records = sweep::read_records(r_in, &nt);
    if (r_metric == "m") {
      const auto rows = sweep::bin_reduce_m(records, r_bins);
      std::ofstream out(r_out);
      out << "m_lo,m_hi,max_p\n";
      for (const auto& row : rows) {
        out << row.lo << ',' << row.hi << ',';
        if (row.max_p) out << *row.max_p;
        out << '\n';
      }
    } else {
      if (r_target < 0 || r_target >= nt)
        throw CLI::ValidationError("target-index outside the file's fidelity columns");
      const auto taus = sweep::default_fidelity_thresholds();
      if (r_improvement) {
        const auto table = sweep::relative_improvement(records, r_target, taus, r_baseline);
        std::ofstream out(r_out);
        out << "tau";
        for (const auto& d : table.detectors) out << ",L[" << d << "]";
        out << '\n';
        for (const auto& row : table.rows) {
          out << row.tau;
          for (const auto& l : row.l_per_detector) {
            out << ',';
            if (l) out << *l;
          }
          out << '\n';
        }
      } else {
        const auto rows = sweep::bin_reduce_fidelity(records, r_target, taus);
        std::ofstream out(r_out);
        out << "tau,max_p\n";
        for (const auto& row : rows) {
          out << row.tau << ',';
          if (row.max_p) out << *row.max_p;
          out << '\n';
        }
      }
    }
    std::printf("wrote %s\n", r_out.c_str());
    return kExitOk;
  }

  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const tfsim::NoSolutionError& e) {
    std::fprintf(stderr, "no solution: %s\n", e.what());
    return kExitNoSolution;
  } catch (const tfsim::NumericGuardError& e) {
    std::fprintf(stderr, "numeric guard: %s\n", e.what());
    return kExitNumericGuard;
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
