#include "tfsim/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tfsim::io {

namespace {

std::string fmt(Real x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_matrix(const std::string& path, const TruncatedOperator& op,
                  std::optional<Complex> xi) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix: cannot open " + path);
  out << "# tfsim matrix v1\n";
  out << "dim " << op.dim << "\n";
  out << "provenance " << to_string(op.provenance) << "\n";
  if (xi) out << "xi " << fmt(xi->real()) << ' ' << fmt(xi->imag()) << "\n";
  for (int i = 0; i < op.dim; ++i) {
    for (int j = 0; j < op.dim; ++j) {
      if (j) out << ' ';
      out << fmt(op.entries(i, j).real()) << ' ' << fmt(op.entries(i, j).imag());
    }
    out << '\n';
  }
}

LoadedMatrix read_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_matrix: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# tfsim matrix", 0) != 0)
    throw std::runtime_error("read_matrix: bad header in " + path);
  LoadedMatrix loaded;
  int dim = 0;
  std::string provenance = "algebraic";
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dim") {
      ls >> dim;
    } else if (key == "provenance") {
      ls >> provenance;
    } else if (key == "xi") {
      Real re = 0, im = 0;
      ls >> re >> im;
      loaded.xi = Complex(re, im);
    } else {
      break;  // first matrix row already consumed into `line`
    }
  }
  if (dim < 1) throw std::runtime_error("read_matrix: missing dim in " + path);
  loaded.op.dim = dim;
  loaded.op.provenance = provenance_from_string(provenance);
  loaded.op.entries.resize(dim, dim);
  // `line` holds the first data row
  for (int i = 0; i < dim; ++i) {
    if (i > 0 && !std::getline(in, line))
      throw std::runtime_error("read_matrix: truncated matrix in " + path);
    std::istringstream ls(line);
    for (int j = 0; j < dim; ++j) {
      Real re, im;
      if (!(ls >> re >> im))
        throw std::runtime_error("read_matrix: malformed row in " + path);
      loaded.op.entries(i, j) = Complex(re, im);
    }
  }
  return loaded;
}

void write_guard_report(const std::string& path, const dispmat::GuardReport& report) {
  nlohmann::json j;
  auto cells = [](const std::vector<std::pair<int, int>>& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [m, n] : v) arr.push_back({m, n});
    return arr;
  };
  j["underflow_cells"] = cells(report.underflow_cells);
  j["overflow_cells"] = cells(report.overflow_cells);
  j["invalid_cells"] = cells(report.invalid_cells);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_guard_report: cannot open " + path);
  out << j.dump(2) << '\n';
}

void write_error_stats_csv(const std::string& path, const tame::ErrorMatrixStats& stats) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_error_stats_csv: cannot open " + path);
  out << "column,mean_log10,std_log10,max_log10\n";
  for (Eigen::Index j = 0; j < stats.col_mean.size(); ++j)
    out << j << ',' << fmt(stats.col_mean[j]) << ',' << fmt(stats.col_std[j]) << ','
        << fmt(stats.col_max[j]) << '\n';
}

void write_norms_csv(const std::string& path, const std::vector<std::string>& names,
                     const std::vector<RealVector>& norms) {
  if (names.size() != norms.size())
    throw std::invalid_argument("write_norms_csv: names/columns mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_norms_csv: cannot open " + path);
  out << "column";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  const Eigen::Index rows = norms.empty() ? 0 : norms.front().size();
  for (Eigen::Index i = 0; i < rows; ++i) {
    out << i;
    for (const auto& v : norms) out << ',' << fmt(v[i]);
    out << '\n';
  }
}

}  // namespace tfsim::io
