#include "tfsim/sweep.hpp"

#include "tfsim/expm.hpp"
#include "tfsim/metrics.hpp"
#include "tfsim/tame.hpp"

#include <json.hpp>

#include <atomic>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

namespace tfsim::sweep {

namespace {

const Real kNaN = std::numeric_limits<Real>::quiet_NaN();

std::string fmt(Real x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string record_key(Real gamma, Real xi, Real eta, const std::string& det) {
  return fmt(gamma) + "|" + fmt(xi) + "|" + fmt(eta) + "|" + det;
}

// Ladder-monomial coefficient tables g(n) with their band offsets, matching
// metrics::ladder_moments.
struct MonomialTables {
  // order: a, a2, n, a3, ada2, a4, ada3, ad2a2
  static constexpr int kCount = 8;
  static constexpr int delta[kCount] = {1, 2, 0, 3, 1, 4, 2, 0};
  static constexpr int nmin[kCount] = {1, 2, 1, 3, 2, 4, 3, 2};
  std::array<RealVector, kCount> g;

  explicit MonomialTables(int d0) {
    for (int a = 0; a < kCount; ++a) g[a] = RealVector::Zero(d0);
    for (int n = 0; n < d0; ++n) {
      const Real nr = n;
      if (n >= 1) {
        g[0][n] = std::sqrt(nr);
        g[2][n] = nr;
      }
      if (n >= 2) {
        g[1][n] = std::sqrt(nr * (nr - 1));
        g[4][n] = (nr - 1) * std::sqrt(nr);
        g[7][n] = nr * (nr - 1);
      }
      if (n >= 3) {
        g[3][n] = std::sqrt(nr * (nr - 1) * (nr - 2));
        g[6][n] = (nr - 2) * std::sqrt(nr * (nr - 1));
      }
      if (n >= 4) g[5][n] = std::sqrt(nr * (nr - 1) * (nr - 2) * (nr - 3));
    }
  }
};

metrics::LadderMoments to_moments(const std::array<Complex, MonomialTables::kCount>& z) {
  metrics::LadderMoments m;
  m.a = z[0];
  m.a2 = z[1];
  m.n = z[2].real();
  m.a3 = z[3];
  m.ada2 = z[4];
  m.a4 = z[5];
  m.ada3 = z[6];
  m.ad2a2 = z[7].real();
  return m;
}

// Per-(xi, eta) family: band sums S_delta(m, i) = sum_k B_k(m,i) conj(B_k(m,i+delta))
// with B_k(m,j) = D(m, j-k) m_k(j). Contracting with mu and POVM weights later
// reproduces the rank-1 conditional-state algebra of prepare_conditional.
struct FamilyBands {
  int d0;
  std::array<Matrix, 5> s;  // s[delta](m, i), i < d0 - delta

  FamilyBands(const Matrix& disp, const RealMatrix& kraus, int d0_) : d0(d0_) {
    for (int dd = 0; dd < 5; ++dd) s[dd] = Matrix::Zero(d0, d0);
    Vector row(d0);
    for (int m = 0; m < d0; ++m) {
      for (int j = 0; j < d0; ++j) row[j] = disp(m, j);
      for (int dd = 0; dd < 5; ++dd) {
        for (int i = 0; i + dd < d0; ++i) {
          Complex acc = 0.0;
          for (int k = 0; k <= i; ++k) {
            acc += row[i - k] * std::conj(row[i + dd - k]) * kraus(k, i) * kraus(k, i + dd);
          }
          s[dd](m, i) = acc;
        }
      }
    }
  }
};

struct DetectorOutputs {
  Real probability;
  std::array<Complex, MonomialTables::kCount> moments;  // unnormalized
  Real r00, r11;
  Complex r01;
  Real edge_population;  // top four diagonal levels, unnormalized
};

}  // namespace

std::vector<Real> default_fidelity_thresholds() {
  std::vector<Real> taus;
  for (int k = 0; k <= 19; ++k) taus.push_back(0.80 + 0.01 * k);
  taus.push_back(0.999);
  return taus;
}

SweepResult run_sweep(const SweepConfig& config) {
  if (config.gamma_range.count < 2 || config.xi_range.count < 2)
    throw InvalidDimensionError("run_sweep: grid counts must be >= 2");
  if (config.etas.empty() || config.detectors.empty())
    throw InvalidDimensionError("run_sweep: need at least one eta and one detector");

  SweepResult result;
  // dimension resolution: overrides first, then the cutoff-error search and the cached dimension search
  const Real gamma_star = config.gamma_range.hi;
  const Real xi_star = config.xi_range.hi;
  result.d0 = config.d0 > 0 ? config.d0
                            : circuit::find_d0(gamma_star, xi_star, config.epsilon0,
                                               config.probe_dim);
  if (config.d1 > 0) {
    result.d1 = config.d1;
  } else {
    tame::DimensionCache cache(config.cache_path);
    tame::TameConfig tc{result.d0, config.epsilon1, 10.0};
    result.d1 = tame::find_dimension_cached(Complex(xi_star, 0.0), tc, cache);
  }
  const int d0 = result.d0;
  if (result.d1 < d0) throw InvalidDimensionError("run_sweep: d1 < d0");

  const int ng = config.gamma_range.count;
  const int nx = config.xi_range.count;
  const int ne = static_cast<int>(config.etas.size());
  const int nd = static_cast<int>(config.detectors.size());
  const int nt = static_cast<int>(config.targets.size());

  std::vector<std::string> det_names(nd);
  std::vector<RealVector> det_weights(nd);
  for (int d = 0; d < nd; ++d) {
    det_names[d] = config.detectors[d].str();
    det_weights[d] = circuit::make_povm(config.detectors[d], d0).weights;
  }

  const long total = long(ng) * nx * ne * nd;
  std::vector<SweepRecord> slots(total);
  std::vector<char> present(total, 0);
  auto slot_index = [&](int gj, int xj, int ej, int dj) {
    return ((long(gj) * nx + xj) * ne + ej) * nd + dj;
  };

  // resume from an existing record file when the grid matches
  {
    int file_targets = 0;
    std::vector<SweepRecord> old;
    try {
      old = read_records(config.output_path, &file_targets);
    } catch (...) {
      old.clear();
    }
    if (!old.empty() && file_targets == nt) {
      std::map<std::string, long> index;
      for (int gj = 0; gj < ng; ++gj)
        for (int xj = 0; xj < nx; ++xj)
          for (int ej = 0; ej < ne; ++ej)
            for (int dj = 0; dj < nd; ++dj)
              index[record_key(config.gamma_range.value(gj), config.xi_range.value(xj),
                               config.etas[ej], det_names[dj])] =
                  slot_index(gj, xj, ej, dj);
      for (auto& rec : old) {
        auto it = index.find(record_key(rec.gamma, rec.xi, rec.eta, rec.detector));
        if (it != index.end() && !present[it->second]) {
          slots[it->second] = std::move(rec);
          present[it->second] = 1;
        }
      }
    }
  }

  // columns that still need work
  std::vector<std::pair<int, int>> tasks;  // (xi index, eta index)
  std::vector<char> column_needed(nx, 0);
  for (int xj = 0; xj < nx; ++xj) {
    for (int ej = 0; ej < ne; ++ej) {
      bool needed = false;
      for (int gj = 0; gj < ng && !needed; ++gj)
        for (int dj = 0; dj < nd && !needed; ++dj)
          if (!present[slot_index(gj, xj, ej, dj)]) needed = true;
      if (needed) {
        tasks.emplace_back(xj, ej);
        column_needed[xj] = 1;
      }
    }
  }

  // single-writer phase: one displacement build per unique xi
  std::vector<Matrix> disp(nx);
  for (int xj = 0; xj < nx; ++xj) {
    if (!column_needed[xj]) continue;
    disp[xj] = tame::tame_build(Complex(config.xi_range.value(xj), 0.0), result.d1, d0).entries;
    ++result.tame_builds;
  }

  const MonomialTables tables(d0);
  std::vector<RealVector> mus(ng);
  for (int gj = 0; gj < ng; ++gj)
    mus[gj] = circuit::tmsv_coeffs(config.gamma_range.value(gj), d0);

  std::atomic<long> computed{0};
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    RealMatrix kraus(d0, d0);
    for (;;) {
      const size_t t = next.fetch_add(1);
      if (t >= tasks.size()) return;
      const auto [xj, ej] = tasks[t];
      const Real eta = config.etas[ej];
      for (int k = 0; k < d0; ++k) kraus.row(k) = circuit::loss_kraus_diagonal(eta, k, d0);
      const FamilyBands bands(disp[xj], kraus, d0);

      for (int gj = 0; gj < ng; ++gj) {
        const RealVector& mu = mus[gj];
        // per-heralding-level monomial sums, contracted with POVM weights below
        std::array<std::vector<Complex>, MonomialTables::kCount> mono;
        std::vector<Real> trace_m(d0), edge_m(d0), r00_m(d0), r11_m(d0);
        std::vector<Complex> r01_m(d0);
        for (int a = 0; a < MonomialTables::kCount; ++a) mono[a].assign(d0, Complex(0, 0));
        for (int m = 0; m < d0; ++m) {
          // diagonal band: trace, corners, top-edge population
          Real tr = 0, edge = 0;
          for (int i = 0; i < d0; ++i) {
            const Real cell = (bands.s[0](m, i) * mu[i] * mu[i]).real();
            tr += cell;
            if (i >= d0 - 4) edge += cell;
          }
          trace_m[m] = tr;
          edge_m[m] = edge;
          r00_m[m] = (bands.s[0](m, 0) * mu[0] * mu[0]).real();
          r11_m[m] = d0 > 1 ? (bands.s[0](m, 1) * mu[1] * mu[1]).real() : 0.0;
          r01_m[m] = d0 > 1 ? bands.s[1](m, 0) * mu[0] * mu[1] : Complex(0, 0);
          for (int a = 0; a < MonomialTables::kCount; ++a) {
            const int dd = tables.delta[a];
            Complex acc = 0.0;
            // s[dd](m, i) holds C(i, i+dd); the monomial reads the lower band
            // C(n, n-dd) = conj(C(n-dd, n))
            for (int n = tables.nmin[a]; n < d0; ++n)
              acc += std::conj(bands.s[dd](m, n - dd)) * (mu[n - dd] * mu[n]) *
                     tables.g[a][n];
            mono[a][m] = acc;
          }
        }
        for (int dj = 0; dj < nd; ++dj) {
          const long slot = slot_index(gj, xj, ej, dj);
          if (present[slot]) continue;
          const RealVector& w = det_weights[dj];
          SweepRecord rec;
          rec.gamma = config.gamma_range.value(gj);
          rec.xi = config.xi_range.value(xj);
          rec.eta = eta;
          rec.detector = det_names[dj];
          Real prob = 0;
          for (int m = 0; m < d0; ++m) prob += w[m] * trace_m[m];
          rec.probability = prob;
          rec.fidelities.assign(nt, kNaN);
          if (!(prob > circuit::kMinProbability)) {
            rec.probability = 0.0;
            rec.unnormalizable = true;
            rec.nonlinear_m = kNaN;
          } else {
            std::array<Complex, MonomialTables::kCount> z;
            for (int a = 0; a < MonomialTables::kCount; ++a) {
              Complex acc = 0.0;
              for (int m = 0; m < d0; ++m) acc += w[m] * mono[a][m];
              z[a] = acc / prob;
            }
            try {
              const auto qm =
                  metrics::quadrature_moments(metrics::rotate_quarter(to_moments(z)));
              rec.nonlinear_m =
                  metrics::minimize_variance(metrics::variance_coefficients(qm)).first /
                  metrics::kLambdaGaussian;
            } catch (const NumericGuardError&) {
              rec.nonlinear_m = kNaN;
            }
            Real f00 = 0, f11 = 0, edge = 0;
            Complex f01 = 0;
            for (int m = 0; m < d0; ++m) {
              f00 += w[m] * r00_m[m];
              f11 += w[m] * r11_m[m];
              f01 += w[m] * r01_m[m];
              edge += w[m] * edge_m[m];
            }
            f00 /= prob;
            f11 /= prob;
            f01 /= prob;
            for (int ti = 0; ti < nt; ++ti) {
              const Real c = std::cos(config.targets[ti]);
              const Real s = std::sin(config.targets[ti]);
              rec.fidelities[ti] = c * c * f00 + s * s * f11 + 2 * c * s * f01.real();
            }
            rec.cutoff_bias = edge / prob > metrics::kCutoffBiasThreshold;
          }
          slots[slot] = std::move(rec);
          computed.fetch_add(1);
        }
      }
      // publish completed slots for this task
      for (int gj = 0; gj < ng; ++gj)
        for (int dj = 0; dj < nd; ++dj) present[slot_index(gj, xj, ej, dj)] = 1;
    }
  };

  const int jobs = std::max(1, config.parallelism);
  if (jobs == 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < std::min<size_t>(jobs, tasks.size()); ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  result.computed = computed.load();

  // deterministic order: gamma, xi, eta ascending, detector lexicographic
  std::vector<int> eta_order(ne), det_order(nd);
  std::iota(eta_order.begin(), eta_order.end(), 0);
  std::sort(eta_order.begin(), eta_order.end(),
            [&](int a, int b) { return config.etas[a] < config.etas[b]; });
  std::iota(det_order.begin(), det_order.end(), 0);
  std::sort(det_order.begin(), det_order.end(),
            [&](int a, int b) { return det_names[a] < det_names[b]; });

  result.records.reserve(total);
  for (int gj = 0; gj < ng; ++gj)
    for (int xj = 0; xj < nx; ++xj)
      for (int ej : eta_order)
        for (int dj : det_order)
          result.records.push_back(std::move(slots[slot_index(gj, xj, ej, dj)]));

  if (!config.output_path.empty())
    write_records(config.output_path, result.records, config, result.d0, result.d1);
  return result;
}

namespace {

std::string flags_field(const SweepRecord& r) {
  std::string out;
  if (r.unnormalizable) out = "unnormalizable";
  if (r.cutoff_bias) out += out.empty() ? "cutoff_bias" : ";cutoff_bias";
  return out;
}

void write_value(std::ostream& os, Real v) {
  if (std::isnan(v))
    return;  // empty field
  os << fmt(v);
}

}  // namespace

void write_records(const std::string& path, const std::vector<SweepRecord>& records,
                   const SweepConfig& config, int d0, int d1) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("write_records: cannot open " + tmp);
    out << "gamma,xi,eta,detector,probability,nonlinear_m";
    for (size_t t = 0; t < config.targets.size(); ++t)
      out << ",fidelity[theta=" << fmt(config.targets[t]) << "]";
    out << ",flags\n";
    for (const auto& r : records) {
      out << fmt(r.gamma) << ',' << fmt(r.xi) << ',' << fmt(r.eta) << ',' << r.detector
          << ',' << fmt(r.probability) << ',';
      write_value(out, r.nonlinear_m);
      for (Real f : r.fidelities) {
        out << ',';
        write_value(out, f);
      }
      out << ',' << flags_field(r) << '\n';
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("write_records: cannot replace " + path);

  nlohmann::json meta;
  meta["version"] = "tfsim 1.0";
  meta["d0"] = d0;
  meta["d1"] = d1;
  meta["records"] = records.size();
  meta["config"]["gamma_range"] = {config.gamma_range.lo, config.gamma_range.hi,
                                   config.gamma_range.count};
  meta["config"]["xi_range"] = {config.xi_range.lo, config.xi_range.hi,
                                config.xi_range.count};
  meta["config"]["etas"] = config.etas;
  std::vector<std::string> dets;
  for (const auto& d : config.detectors) dets.push_back(d.str());
  meta["config"]["detectors"] = dets;
  meta["config"]["epsilon0"] = config.epsilon0;
  meta["config"]["epsilon1"] = config.epsilon1;
  meta["config"]["targets"] = config.targets;
  meta["config"]["bins"] = config.bins;
  meta["config"]["parallelism"] = config.parallelism;
  meta["config"]["probe_dim"] = config.probe_dim;
  std::ofstream mout(path + ".meta.json");
  mout << meta.dump(2) << '\n';
}

std::vector<SweepRecord> read_records(const std::string& path, int* n_targets) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_records: cannot open " + path);
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("read_records: empty file");
  int nt = 0;
  {
    size_t pos = 0;
    while ((pos = header.find("fidelity[", pos)) != std::string::npos) {
      ++nt;
      ++pos;
    }
  }
  if (n_targets) *n_targets = nt;
  std::vector<SweepRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // manual split keeping trailing empty fields, so a truncated final line
    // from an interrupted run cannot masquerade as a complete record
    std::vector<std::string> cells;
    size_t start = 0;
    for (;;) {
      const size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        cells.push_back(line.substr(start));
        break;
      }
      cells.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (static_cast<int>(cells.size()) != 7 + nt) continue;  // malformed tail line
    try {
      SweepRecord r;
      r.gamma = std::stod(cells[0]);
      r.xi = std::stod(cells[1]);
      r.eta = std::stod(cells[2]);
      r.detector = cells[3];
      r.probability = std::stod(cells[4]);
      r.nonlinear_m = cells[5].empty() ? kNaN : std::stod(cells[5]);
      for (int t = 0; t < nt; ++t)
        r.fidelities.push_back(cells[6 + t].empty() ? kNaN : std::stod(cells[6 + t]));
      const std::string& fl = cells[6 + nt];
      r.unnormalizable = fl.find("unnormalizable") != std::string::npos;
      r.cutoff_bias = fl.find("cutoff_bias") != std::string::npos;
      out.push_back(std::move(r));
    } catch (const std::exception&) {
      continue;  // tolerate a truncated final line from an interrupted run
    }
  }
  return out;
}

std::vector<MBinRow> bin_reduce_m(const std::vector<SweepRecord>& records, int bins) {
  if (records.empty()) throw InvalidDimensionError("bin_reduce_m: no records");
  if (bins < 1) throw InvalidDimensionError("bin_reduce_m: bins must be >= 1");
  Real lo = std::numeric_limits<Real>::infinity();
  Real hi = -std::numeric_limits<Real>::infinity();
  for (const auto& r : records) {
    if (std::isnan(r.nonlinear_m)) continue;
    lo = std::min(lo, r.nonlinear_m);
    hi = std::max(hi, r.nonlinear_m);
  }
  if (!(lo <= hi)) throw InvalidDimensionError("bin_reduce_m: no records carry M");
  const Real width = (hi > lo) ? (hi - lo) / bins : 1.0;
  std::vector<MBinRow> rows(bins);
  for (int b = 0; b < bins; ++b) rows[b] = {lo + width * b, lo + width * (b + 1), {}};
  for (const auto& r : records) {
    if (std::isnan(r.nonlinear_m)) continue;
    int b = static_cast<int>((r.nonlinear_m - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    if (!rows[b].max_p || r.probability > *rows[b].max_p) rows[b].max_p = r.probability;
  }
  return rows;
}

std::vector<FidelityRow> bin_reduce_fidelity(const std::vector<SweepRecord>& records,
                                             int target_index, const std::vector<Real>& taus) {
  if (records.empty()) throw InvalidDimensionError("bin_reduce_fidelity: no records");
  std::vector<FidelityRow> rows;
  rows.reserve(taus.size());
  for (Real tau : taus) {
    FidelityRow row{tau, {}};
    for (const auto& r : records) {
      if (target_index >= static_cast<int>(r.fidelities.size())) continue;
      const Real f = r.fidelities[target_index];
      if (std::isnan(f) || f < tau) continue;
      if (!row.max_p || r.probability > *row.max_p) row.max_p = r.probability;
    }
    rows.push_back(row);
  }
  return rows;
}

ImprovementTable relative_improvement(const std::vector<SweepRecord>& records,
                                      int target_index, const std::vector<Real>& taus,
                                      const std::string& baseline) {
  std::map<std::string, std::vector<SweepRecord>> by_det;
  std::vector<std::string> order;
  for (const auto& r : records) {
    if (by_det.find(r.detector) == by_det.end()) order.push_back(r.detector);
    by_det[r.detector].push_back(r);
  }
  if (by_det.find(baseline) == by_det.end())
    throw InvalidDimensionError("relative_improvement: baseline '" + baseline +
                                "' not present in records");

  ImprovementTable table;
  for (const auto& name : order)
    if (name != baseline) table.detectors.push_back(name);

  const auto base_rows = bin_reduce_fidelity(by_det[baseline], target_index, taus);
  std::map<std::string, std::vector<FidelityRow>> det_rows;
  for (const auto& name : table.detectors)
    det_rows[name] = bin_reduce_fidelity(by_det[name], target_index, taus);

  for (size_t i = 0; i < taus.size(); ++i) {
    ImprovementRow row;
    row.tau = taus[i];
    for (const auto& name : table.detectors) {
      const auto& bp = base_rows[i].max_p;
      const auto& dp = det_rows[name][i].max_p;
      if (bp && dp && *bp > 0 && *dp > 0)
        row.l_per_detector.push_back(std::log10(*dp) - std::log10(*bp));
      else
        row.l_per_detector.push_back(std::nullopt);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace tfsim::sweep
