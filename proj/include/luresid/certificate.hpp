#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "luresid/model.hpp"
#include "luresid/sector.hpp"
#include "luresid/types.hpp"

namespace luresid {

/// Regional stability certificate: Lyapunov-like shape P, sector multiplier
/// diagonal M (stored as its diagonal vector), region matrix L, scale s and
/// contraction rate alpha. The certified invariant region is E(P^{-1}/s^2)
/// inside the polytope L(H) with H = L P^{-1}.
template <class Scalar>
struct CertificateT {
  MatX<Scalar> P;       // n x n, symmetric positive definite
  VecX<Scalar> m_diag;  // m positive multipliers
  MatX<Scalar> L;       // m x n
  Scalar s = 1;
  Scalar alpha = Scalar(0.5);

  [[nodiscard]] Index n() const { return P.rows(); }
  [[nodiscard]] Index m() const { return m_diag.size(); }

  void validate() const {
    if (P.rows() != P.cols()) throw ConfigError("Certificate: P not square");
    const Scalar scale = std::max(Scalar(1), P.cwiseAbs().maxCoeff());
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale) {
      throw ConfigError("Certificate: P asymmetry exceeds tolerance");
    }
    if (L.rows() != m_diag.size() || L.cols() != P.rows()) {
      throw ConfigError("Certificate: L shape does not match P and M");
    }
    if (!(m_diag.array() > Scalar(0)).all()) {
      throw ConfigError("Certificate: M diagonal must be strictly positive");
    }
    if (!(s > Scalar(0))) throw ConfigError("Certificate: s must be positive");
    if (!(alpha > Scalar(0) && alpha < Scalar(1))) {
      throw ConfigError("Certificate: alpha must lie in (0, 1)");
    }
    if (!P.allFinite() || !L.allFinite() || !m_diag.allFinite()) {
      throw ConfigError("Certificate: non-finite entries");
    }
  }
};

using Certificate = CertificateT<double>;

/// Stability LMI block matrix, size (2n + r + m). Upper blocks by row:
///   [ -a^2 P   0      P C2' + L'   P A' ]
///   [   .     -I_r    D21'         B'   ]
///   [   .      .     -2 M          M B2']
///   [   .      .       .          -P    ]
/// The lower triangle is mirrored from the upper one, so the result is
/// bitwise symmetric.
template <class Scalar>
MatX<Scalar> build_F(const ModelParamsT<Scalar>& params,
                     const CertificateT<Scalar>& cert) {
  params.validate();
  const Index n = params.dims.n, r = params.dims.r, m = params.dims.m;
  if (cert.P.rows() != n || cert.m_diag.size() != m || cert.L.rows() != m ||
      cert.L.cols() != n) {
    throw ConfigError("build_F: certificate shapes do not match model dims");
  }
  const Index dim = 2 * n + r + m;
  MatX<Scalar> F = MatX<Scalar>::Zero(dim, dim);
  const Index ox = 0, ou = n, ow = n + r, os = n + r + m;
  const MatX<Scalar> Mdiag = cert.m_diag.asDiagonal();

  F.block(ox, ox, n, n) = -(cert.alpha * cert.alpha) * cert.P;
  F.block(ox, ow, n, m) = cert.P * params.C2.transpose() + cert.L.transpose();
  F.block(ox, os, n, n) = cert.P * params.A.transpose();
  F.block(ou, ou, r, r) = -MatX<Scalar>::Identity(r, r);
  F.block(ou, ow, r, m) = params.D21.transpose();
  F.block(ou, os, r, n) = params.B.transpose();
  F.block(ow, ow, m, m) = Scalar(-2) * Mdiag;
  F.block(ow, os, m, n) = Mdiag * params.B2.transpose();
  F.block(os, os, n, n) = -cert.P;

  for (Index j = 0; j < dim; ++j) {
    for (Index i = j + 1; i < dim; ++i) F(i, j) = F(j, i);
  }
  return F;
}

/// Region LMI for channel i (zero based): [[1/s^2, l_i], [l_i', P]].
template <class Scalar>
MatX<Scalar> build_G(const CertificateT<Scalar>& cert, Index i) {
  if (i < 0 || i >= cert.m()) {
    throw ConfigError("build_G: channel index " + std::to_string(i) +
                      " out of range for m = " + std::to_string(cert.m()));
  }
  const Index n = cert.n();
  MatX<Scalar> G(1 + n, 1 + n);
  G(0, 0) = Scalar(1) / (cert.s * cert.s);
  G.block(0, 1, 1, n) = cert.L.row(i);
  G.block(1, 0, n, 1) = cert.L.row(i).transpose();
  G.block(1, 1, n, n) = cert.P;
  return G;
}

/// Outcome of verifying a certificate against a model and input bound delta.
template <class Scalar>
struct CertificateReportT {
  bool f_negative_definite = false;
  std::vector<bool> g_psd;
  bool delta_ok = false;
  bool alpha_ok = false;
  Scalar delta = 0;      // the bound the checks were run against
  Scalar delta_max = 0;  // largest admissible bound sqrt(1 - alpha^2) * s
  EllipsoidT<Scalar> region;  // X = P^{-1}/s^2
  MatX<Scalar> H;             // L P^{-1}
  Scalar lambda_min = 0, lambda_max = 0;  // extreme eigenvalues of P^{-1}
  Scalar alpha = 0, s = 0;

  [[nodiscard]] bool passed() const {
    if (!f_negative_definite || !delta_ok || !alpha_ok) return false;
    for (bool g : g_psd) {
      if (!g) return false;
    }
    return true;
  }
};

using CertificateReport = CertificateReportT<double>;

/// PSD shift tolerance for the region LMIs; the stability LMI is checked
/// strictly (plain Cholesky of -F).
inline constexpr double kPsdShift = 1e-12;

/// H = L P^{-1} by linear solve (no explicit inverse).
template <class Scalar>
MatX<Scalar> h_from_certificate(const CertificateT<Scalar>& cert) {
  Eigen::LLT<MatX<Scalar>> llt(cert.P);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("h_from_certificate: P is not positive definite");
  }
  return llt.solve(cert.L.transpose()).transpose();
}

/// Cholesky-based verification of all certificate conditions. Out-of-range
/// alpha or indefinite matrices are reported, not thrown; only non-finite
/// input is an error.
template <class Scalar>
CertificateReportT<Scalar> check_certificate(const ModelParamsT<Scalar>& params,
                                             const CertificateT<Scalar>& cert,
                                             Scalar delta) {
  if (!std::isfinite(static_cast<double>(delta)) || delta < Scalar(0)) {
    throw ConfigError("check_certificate: delta must be finite and >= 0");
  }
  if (!cert.P.allFinite() || !cert.L.allFinite() || !cert.m_diag.allFinite() ||
      !std::isfinite(static_cast<double>(cert.s)) ||
      !std::isfinite(static_cast<double>(cert.alpha))) {
    throw ConfigError("check_certificate: non-finite certificate entries");
  }

  CertificateReportT<Scalar> rep;
  rep.alpha = cert.alpha;
  rep.s = cert.s;
  rep.delta = delta;

  const MatX<Scalar> F = build_F(params, cert);
  Eigen::LLT<MatX<Scalar>> lltF((-F).eval());
  rep.f_negative_definite = (lltF.info() == Eigen::Success);

  const Index n = cert.n(), m = cert.m();
  rep.g_psd.resize(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    MatX<Scalar> G = build_G(cert, i);
    G.diagonal().array() += Scalar(kPsdShift);
    Eigen::LLT<MatX<Scalar>> lltG(G);
    rep.g_psd[static_cast<std::size_t>(i)] = (lltG.info() == Eigen::Success);
  }

  const Scalar one_minus_a2 = Scalar(1) - cert.alpha * cert.alpha;
  rep.alpha_ok = cert.alpha > Scalar(0) && cert.alpha < Scalar(1);
  rep.delta_ok = delta * delta <= one_minus_a2 * cert.s * cert.s;
  rep.delta_max =
      rep.alpha_ok ? std::sqrt(one_minus_a2) * cert.s : Scalar(0);

  // Region data: meaningful only when P is positive definite; otherwise the
  // definiteness flags above already fail and these stay zero.
  Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(cert.P);
  rep.H = MatX<Scalar>::Zero(m, n);
  rep.region.X = MatX<Scalar>::Zero(n, n);
  if (es.info() == Eigen::Success && es.eigenvalues().minCoeff() > Scalar(0)) {
    const VecX<Scalar> lam = es.eigenvalues();
    const MatX<Scalar> Pinv = es.eigenvectors() *
                              lam.cwiseInverse().asDiagonal() *
                              es.eigenvectors().transpose();
    rep.region.X = Pinv / (cert.s * cert.s);
    rep.H = h_from_certificate(cert);
    // Eigenvalues of P^{-1} are the reciprocals of those of P.
    rep.lambda_min = Scalar(1) / lam.maxCoeff();
    rep.lambda_max = Scalar(1) / lam.minCoeff();
  }
  return rep;
}

/// Decaying state-norm bound: for |x_0| = x0_norm and inputs bounded by
/// u_sup over steps 0..k-1,
///   |x_k| <= min( sqrt(lmax/lmin) a^k x0_norm
///                 + sqrt(1/((1 - a^2) lmin)) u_sup,
///                 s / sqrt(lmin) ),
/// with lmin, lmax the extreme eigenvalues of P^{-1}.
template <class Scalar>
Scalar iss_bound(const CertificateT<Scalar>& cert, Scalar x0_norm,
                 Scalar u_sup, Index k) {
  if (x0_norm < Scalar(0) || u_sup < Scalar(0) || k < 0) {
    throw ConfigError("iss_bound: x0_norm, u_sup and k must be nonnegative");
  }
  if (!(cert.alpha > Scalar(0) && cert.alpha < Scalar(1))) {
    throw ConfigError("iss_bound: alpha must lie in (0, 1)");
  }
  Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(cert.P);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= Scalar(0)) {
    throw NumericalError("iss_bound: P is singular or not positive definite");
  }
  const Scalar lmin = Scalar(1) / es.eigenvalues().maxCoeff();
  const Scalar lmax = Scalar(1) / es.eigenvalues().minCoeff();
  const Scalar one_minus_a2 = Scalar(1) - cert.alpha * cert.alpha;
  const Scalar transient = std::sqrt(lmax / lmin) *
                           std::pow(cert.alpha, Scalar(k)) * x0_norm;
  const Scalar gain = std::sqrt(Scalar(1) / (one_minus_a2 * lmin)) * u_sup;
  const Scalar cap = cert.s / std::sqrt(lmin);
  return std::min(transient + gain, cap);
}

}  // namespace luresid
