#include "tfsim/types.hpp"

namespace tfsim {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm: return "closed-form";
    case Provenance::Recurrent: return "recurrent";
    case Provenance::Tame: return "tame";
    case Provenance::PlainExpm: return "plain-expm";
    case Provenance::Algebraic: return "algebraic";
  }
  return "unknown";
}

Provenance provenance_from_string(const std::string& s) {
  if (s == "closed-form") return Provenance::ClosedForm;
  if (s == "recurrent") return Provenance::Recurrent;
  if (s == "tame") return Provenance::Tame;
  if (s == "plain-expm") return Provenance::PlainExpm;
  if (s == "algebraic") return Provenance::Algebraic;
  throw std::invalid_argument("unknown provenance: " + s);
}

bool TruncatedOperator::all_finite() const {
  return entries.allFinite();
}

bool is_valid_density(const DensityOperator& rho, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  if (rho.dim <= 0 || rho.entries.rows() != rho.dim || rho.entries.cols() != rho.dim)
    return fail("dimension mismatch");
  if (!rho.entries.allFinite()) return fail("non-finite entries");
  const Real herm = (rho.entries - rho.entries.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTol) return fail("not Hermitian: deviation " + std::to_string(herm));
  const Real tr = rho.entries.trace().real();
  if (!(tr > 0.0) || tr > 1.0 + kTraceTol)
    return fail("trace out of range: " + std::to_string(tr));
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.entries, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < kPsdTol)
    return fail("negative eigenvalue: " + std::to_string(es.eigenvalues().minCoeff()));
  return true;
}

}  // namespace tfsim
