#include "tfsim/circuit.hpp"

#include "tfsim/expm.hpp"
#include "tfsim/tame.hpp"

#include <cmath>
#include <sstream>

namespace tfsim::circuit {

RealVector tmsv_coeffs(Real gamma, int dim) {
  if (gamma < 0) throw InvalidDimensionError("tmsv_coeffs: gamma must be >= 0");
  if (dim < 1) throw InvalidDimensionError("tmsv_coeffs: dim must be >= 1");
  RealVector mu(dim);
  const Real sech = 1.0 / std::cosh(gamma);
  const Real th = std::tanh(gamma);
  Real cur = sech;
  for (int i = 0; i < dim; ++i) {
    mu[i] = cur;
    cur *= th;
  }
  return mu;
}

RealVector loss_kraus_diagonal(Real eta, int k, int dim) {
  if (eta < 0.0 || eta > 1.0) throw InvalidDimensionError("loss_kraus: eta must be in [0,1]");
  if (k < 0) throw InvalidDimensionError("loss_kraus: k must be >= 0");
  if (dim < 1) throw InvalidDimensionError("loss_kraus: dim must be >= 1");
  RealVector coeff = RealVector::Zero(dim);
  for (int j = k; j < dim; ++j) {
    // sqrt(binom(j, k)) (1-eta)^(k/2) eta^((j-k)/2)
    const Real log_binom = std::lgamma(Real(j) + 1) - std::lgamma(Real(k) + 1) -
                           std::lgamma(Real(j - k) + 1);
    coeff[j] = std::exp(0.5 * log_binom) * std::pow(1.0 - eta, 0.5 * k) *
               std::pow(eta, 0.5 * (j - k));
  }
  return coeff;
}

TruncatedOperator loss_kraus(Real eta, int k, int dim) {
  TruncatedOperator op{dim, Matrix::Zero(dim, dim), Provenance::Algebraic};
  if (k >= dim) return op;  // A^k vanishes on the truncated space
  const RealVector coeff = loss_kraus_diagonal(eta, k, dim);
  for (int j = k; j < dim; ++j) op.entries(j - k, j) = coeff[j];
  return op;
}

Real cascade_click_probability(int detectors, int clicks, int photons) {
  if (detectors < 1) throw InvalidDimensionError("cascade: detectors must be >= 1");
  if (clicks < 0 || clicks > detectors)
    throw InvalidDimensionError("cascade: clicks must be in [0, detectors]");
  if (photons < 0) throw InvalidDimensionError("cascade: photons must be >= 0");
  // exact binomials: every prefix product below is a small integer
  auto binom = [](int a, int b) {
    Real r = 1.0;
    for (int i = 1; i <= b; ++i) r = r * Real(a - b + i) / Real(i);
    return r;
  };
  Real sum = 0.0;
  for (int l = 0; l <= clicks; ++l) {
    const Real base = Real(clicks - l);
    // 0^0 = 1 by convention (no photons, no constraints)
    const Real pw = (base == 0.0 && photons == 0) ? 1.0 : std::pow(base, Real(photons));
    sum += ((l % 2 == 0) ? 1.0 : -1.0) * binom(clicks, l) * pw;
  }
  return binom(detectors, clicks) * std::pow(Real(detectors), -Real(photons)) * sum;
}

PovmDescriptor PovmDescriptor::parse(const std::string& text) {
  std::istringstream in(text);
  std::string head;
  std::getline(in, head, ':');
  auto next_int = [&](const char* what) {
    std::string tok;
    if (!std::getline(in, tok, ':')) throw std::invalid_argument(std::string("povm: missing ") + what + " in '" + text + "'");
    return std::stoi(tok);
  };
  if (head == "apd") return apd_click();
  if (head == "fock") return fock_projector(next_int("level"));
  if (head == "cascade") {
    const int m = next_int("detectors");
    const int n = next_int("clicks");
    return cascade(m, n);
  }
  throw std::invalid_argument("povm: unknown descriptor '" + text + "'");
}

std::string PovmDescriptor::str() const {
  switch (kind) {
    case Kind::ApdClick: return "apd";
    case Kind::FockProjector: return "fock:" + std::to_string(fock);
    case Kind::Cascade:
      return "cascade:" + std::to_string(detectors) + ":" + std::to_string(clicks);
  }
  return "?";
}

PovmElement make_povm(const PovmDescriptor& d, int dim) {
  if (dim < 1) throw InvalidDimensionError("make_povm: dim must be >= 1");
  PovmElement el{RealVector::Zero(dim), d};
  switch (d.kind) {
    case PovmDescriptor::Kind::FockProjector:
      if (d.fock < 0 || d.fock >= dim)
        throw InvalidDimensionError("make_povm: Fock level outside dimension");
      el.weights[d.fock] = 1.0;
      break;
    case PovmDescriptor::Kind::ApdClick:
      el.weights.setOnes();
      el.weights[0] = 0.0;
      break;
    case PovmDescriptor::Kind::Cascade:
      for (int k = 0; k < dim; ++k)
        el.weights[k] = cascade_click_probability(d.detectors, d.clicks, k);
      break;
  }
  return el;
}

std::vector<PovmDescriptor> standard_povm_set() {
  std::vector<PovmDescriptor> out;
  out.push_back(PovmDescriptor::apd_click());
  for (int f = 1; f <= 6; ++f) out.push_back(PovmDescriptor::fock_projector(f));
  out.push_back(PovmDescriptor::cascade(10, 1));
  out.push_back(PovmDescriptor::cascade(5, 1));
  out.push_back(PovmDescriptor::cascade(2, 1));
  out.push_back(PovmDescriptor::cascade(10, 3));
  out.push_back(PovmDescriptor::cascade(5, 3));
  out.push_back(PovmDescriptor::cascade(4, 3));
  return out;
}

PreparationResult prepare_conditional(Real gamma, Complex xi, Real eta,
                                      const PovmElement& povm, int d0,
                                      const TruncatedOperator& displacement) {
  if (d0 < 1) throw InvalidDimensionError("prepare_conditional: d0 must be >= 1");
  if (displacement.dim < d0)
    throw InvalidDimensionError("prepare_conditional: displacement smaller than d0");
  if (povm.weights.size() < d0)
    throw InvalidDimensionError("prepare_conditional: POVM smaller than d0");
  (void)xi;  // the displacement matrix already encodes xi

  const RealVector mu = tmsv_coeffs(gamma, d0);
  const Matrix& disp = displacement.entries;

  Matrix accum = Matrix::Zero(d0, d0);
  Real prob = 0.0;
  Vector v(d0);
  for (int k = 0; k < d0; ++k) {
    const RealVector mk = loss_kraus_diagonal(eta, k, d0);
    for (int m = 0; m < d0; ++m) {
      const Real w = povm.weights[m];
      if (w == 0.0) continue;
      // v_j = mu_j m_k(j) <m|D|j-k>
      v.setZero();
      for (int j = k; j < d0; ++j) v[j] = mu[j] * mk[j] * disp(m, j - k);
      const Real n2 = v.squaredNorm();
      if (n2 == 0.0) continue;
      prob += w * n2;
      accum.noalias() += w * (v * v.adjoint());
    }
  }

  PreparationResult out;
  out.probability = prob;
  if (!(prob > kMinProbability)) {
    out.probability = 0.0;
    out.unnormalizable = true;
    return out;
  }
  out.rho = DensityOperator{d0, accum / prob};
  return out;
}

PreparationResult prepare_conditional(Real gamma, Complex xi, Real eta,
                                      const PovmElement& povm, int d0, int d1) {
  const TruncatedOperator d = tame::tame_build(xi, d1, d0);
  return prepare_conditional(gamma, xi, eta, povm, d0, d);
}

int find_d0(Real gamma_star, Real xi_star, Real epsilon0, int d1_probe, int max_d0) {
  if (!(epsilon0 > 0.0)) throw InvalidDimensionError("find_d0: epsilon0 must be > 0");
  if (d1_probe < 2) throw InvalidDimensionError("find_d0: probe dimension too small");
  if (max_d0 <= 0) max_d0 = d1_probe / 2;
  if (max_d0 > d1_probe) max_d0 = d1_probe;

  const Matrix probe = expm(tame::displacement_generator(xi_star, d1_probe).entries);
  const RealVector mu = tmsv_coeffs(gamma_star, d1_probe);
  // cell weight of the displaced TMSV state on |i>|j>
  RealMatrix w(d1_probe, d1_probe);
  for (int i = 0; i < d1_probe; ++i)
    for (int j = 0; j < d1_probe; ++j) w(i, j) = mu[i] * mu[i] * std::norm(probe(i, j));

  // the cutoff error of the d0 x d0 block, summed over the complement
  // (positive terms only; no cancellation against 1)
  auto complement = [&](int c) {
    Real err = 0.0;
    for (int i = c; i < d1_probe; ++i) err += w.row(i).sum();
    for (int i = 0; i < c; ++i)
      for (int j = c; j < d1_probe; ++j) err += w(i, j);
    return err;
  };

  // candidate grid {1, 5, 10, ...}: the working dimension only needs to be
  // big enough, and coarse steps keep the d1 cache small
  for (int c = 1; c <= max_d0; c = (c == 1 ? 5 : c + 5)) {
    if (complement(c) <= epsilon0) return c;
  }
  throw NoSolutionError("find_d0: no dimension <= " + std::to_string(max_d0) +
                        " reaches epsilon0; raise the probe dimension");
}

}  // namespace tfsim::circuit
