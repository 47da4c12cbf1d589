#pragma once

#include "tfsim/dispmat.hpp"
#include "tfsim/tame.hpp"
#include "tfsim/types.hpp"

#include <optional>
#include <string>

namespace tfsim::io {

/// Plain-text dense complex matrix, 17 significant digits:
///   # tfsim matrix v1
///   dim <d>
///   provenance <name>
///   xi <re> <im>          (optional)
///   <d rows of 2d numbers: re im re im ...>
void write_matrix(const std::string& path, const TruncatedOperator& op,
                  std::optional<Complex> xi = std::nullopt);

struct LoadedMatrix {
  TruncatedOperator op;
  std::optional<Complex> xi;
};

LoadedMatrix read_matrix(const std::string& path);

/// Guard cells as JSON lists of [m, n] pairs.
void write_guard_report(const std::string& path, const dispmat::GuardReport& report);

/// Per-column CSV: column, mean, std, max of log10|E|.
void write_error_stats_csv(const std::string& path, const tame::ErrorMatrixStats& stats);

/// Column-norm CSV with one named column per construction method.
void write_norms_csv(const std::string& path, const std::vector<std::string>& names,
                     const std::vector<RealVector>& norms);

}  // namespace tfsim::io
