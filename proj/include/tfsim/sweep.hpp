#pragma once

#include "tfsim/circuit.hpp"
#include "tfsim/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tfsim::sweep {

struct GridRange {
  Real lo = 0.0;
  Real hi = 1.0;
  int count = 1001;

  Real value(int idx) const {
    return count < 2 ? lo : lo + (hi - lo) * Real(idx) / Real(count - 1);
  }
};

struct SweepConfig {
  GridRange gamma_range{0.0, 1.0, 1001};
  GridRange xi_range{0.0, 1.0, 1001};
  std::vector<Real> etas{0.80, 0.90, 0.99, 1.00};
  std::vector<circuit::PovmDescriptor> detectors = circuit::standard_povm_set();
  int d0 = 0;                  // 0: resolve via find_d0
  int d1 = 0;                  // 0: resolve via the dimension search / cache
  Real epsilon0 = 1e-13;
  Real epsilon1 = 1e-13;
  std::vector<Real> targets;   // fidelity target angles theta
  int bins = 200;
  std::string output_path = "sweep.csv";
  int parallelism = 1;
  int probe_dim = 200;         // find_d0 probe dimension
  std::string cache_path;      // d1 cache file; empty = no persistence
};

struct SweepRecord {
  Real gamma = 0, xi = 0, eta = 0;
  std::string detector;
  Real probability = 0;
  Real nonlinear_m = 0;            // NaN when unnormalizable
  std::vector<Real> fidelities;    // one per target theta; NaN when unnormalizable
  bool unnormalizable = false;
  bool cutoff_bias = false;
};

struct SweepResult {
  std::vector<SweepRecord> records;  // sorted by (gamma, xi, eta, detector)
  int d0 = 0;
  int d1 = 0;
  long tame_builds = 0;              // displacement constructions performed
  long computed = 0;                 // records computed this run (rest resumed)
};

/// Runs the grid sweep. Deterministic record content independent of
/// parallelism; per unique xi the displacement is built once and shared.
/// When output_path already holds records for this grid they are reused.
SweepResult run_sweep(const SweepConfig& config);

/// Writes records as CSV (17 significant digits) plus a JSON sidecar
/// `<path>.meta.json` with the configuration and dimensions.
void write_records(const std::string& path, const std::vector<SweepRecord>& records,
                   const SweepConfig& config, int d0, int d1);

std::vector<SweepRecord> read_records(const std::string& path, int* n_targets = nullptr);

struct MBinRow {
  Real lo = 0, hi = 0;
  std::optional<Real> max_p;
};

/// Equal-width bins over the observed nonlinear-M range; per-bin max P.
std::vector<MBinRow> bin_reduce_m(const std::vector<SweepRecord>& records, int bins);

struct FidelityRow {
  Real tau = 0;
  std::optional<Real> max_p;
};

/// Per threshold tau: max P over records with fidelity >= tau (cumulative).
std::vector<FidelityRow> bin_reduce_fidelity(const std::vector<SweepRecord>& records,
                                             int target_index, const std::vector<Real>& taus);

/// Default moving-threshold schedule {0.80, 0.81, ..., 0.99, 0.999}.
std::vector<Real> default_fidelity_thresholds();

struct ImprovementRow {
  Real tau = 0;
  std::vector<std::optional<Real>> l_per_detector;  // log10 P_det - log10 P_baseline
};

struct ImprovementTable {
  std::vector<std::string> detectors;  // non-baseline, in first-seen order
  std::vector<ImprovementRow> rows;
};

/// L = log10 P_detector - log10 P_baseline at each fidelity threshold,
/// null wherever either probability vanishes.
ImprovementTable relative_improvement(const std::vector<SweepRecord>& records,
                                      int target_index, const std::vector<Real>& taus,
                                      const std::string& baseline = "apd");

}  // namespace tfsim::sweep
