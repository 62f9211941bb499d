#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "luresid/model.hpp"
#include "luresid/types.hpp"

namespace luresid {

/// Generalized sector data: positive diagonal multiplier Lambda (stored as
/// its diagonal) and the polytope matrix H. With H = 0 this reduces to the
/// standard global sector condition.
template <class Scalar>
struct SectorDataT {
  VecX<Scalar> lambda;  // diagonal of Lambda, strictly positive
  MatX<Scalar> H;       // m x n

  void validate() const {
    if (lambda.size() != H.rows()) {
      throw ConfigError("SectorData: Lambda size " +
                        std::to_string(lambda.size()) + " vs H rows " +
                        std::to_string(H.rows()));
    }
    if (!(lambda.array() > Scalar(0)).all()) {
      throw ConfigError("SectorData: Lambda must be strictly positive");
    }
  }
};

using SectorData = SectorDataT<double>;

/// E(X) = { x : x' X x <= 1 } for symmetric PSD X.
template <class Scalar>
struct EllipsoidT {
  MatX<Scalar> X;

  void validate() const {
    if (X.rows() != X.cols()) throw ConfigError("Ellipsoid: X not square");
    const Scalar scale = std::max(Scalar(1), X.cwiseAbs().maxCoeff());
    if (((X - X.transpose()).cwiseAbs().maxCoeff()) > Scalar(1e-10) * scale) {
      throw ConfigError("Ellipsoid: X not symmetric within tolerance");
    }
    Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(X);
    if (es.eigenvalues().minCoeff() < Scalar(-1e-10)) {
      throw ConfigError("Ellipsoid: X has eigenvalue below -1e-10");
    }
  }
};

using Ellipsoid = EllipsoidT<double>;

/// L(H) = { x : ||H x||_inf <= 1 }.
template <class Scalar>
struct PolytopeT {
  MatX<Scalar> H;
};

using Polytope = PolytopeT<double>;

/// Sector quadratic form
///
///   Gamma(v, x) = [dzn(v); v + H x]' [[-2*Lambda, Lambda], [Lambda, 0]]
///                 [dzn(v); v + H x]
///               = 2 dzn(v)' Lambda (v + H x - dzn(v)),
///
/// nonnegative for every v whenever x lies in L(H).
template <class Scalar>
Scalar gamma(const VecX<Scalar>& v, const VecX<Scalar>& x,
             const SectorDataT<Scalar>& sector) {
  sector.validate();
  if (v.size() != sector.H.rows() || x.size() != sector.H.cols()) {
    throw ConfigError("gamma: v/x sizes do not match sector shapes");
  }
  const VecX<Scalar> dz = deadzone<Scalar>(v);
  const VecX<Scalar> rest = v + sector.H * x - dz;
  return Scalar(2) * (sector.lambda.array() * dz.array() * rest.array()).sum();
}

/// Exact comparison, no tolerance: membership predicates feed Monte-Carlo
/// invariance checks and must be deterministic.
template <class Scalar>
bool in_polytope(const VecX<Scalar>& x, const PolytopeT<Scalar>& poly) {
  if (poly.H.rows() == 0) return true;
  if (x.size() != poly.H.cols()) {
    throw ConfigError("in_polytope: x size does not match H");
  }
  return (poly.H * x).cwiseAbs().maxCoeff() <= Scalar(1);
}

template <class Scalar>
bool in_ellipsoid(const VecX<Scalar>& x, const EllipsoidT<Scalar>& ell) {
  if (x.size() != ell.X.rows()) {
    throw ConfigError("in_ellipsoid: x size does not match X");
  }
  return x.dot(ell.X * x) <= Scalar(1);
}

/// Symmetric inverse square root via eigendecomposition. Eigenvalues in
/// [-1e-12, 0] are clamped to 0 first (PSD drift), which then fails the
/// positivity check below; strictly positive spectra are required.
template <class Scalar>
MatX<Scalar> inverse_sqrt_spd(const MatX<Scalar>& X) {
  Eigen::SelfAdjointEigenSolver<MatX<Scalar>> es(X);
  if (es.info() != Eigen::Success) {
    throw NumericalError("inverse_sqrt_spd: eigendecomposition failed");
  }
  VecX<Scalar> lam = es.eigenvalues();
  for (Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < Scalar(0) && lam[i] >= Scalar(-1e-12)) lam[i] = Scalar(0);
    if (lam[i] <= Scalar(0)) {
      throw NumericalError("inverse_sqrt_spd: matrix is singular (eigenvalue " +
                           std::to_string(static_cast<double>(lam[i])) + ")");
    }
  }
  const VecX<Scalar> inv_sqrt = lam.array().rsqrt();
  return es.eigenvectors() * inv_sqrt.asDiagonal() *
         es.eigenvectors().transpose();
}

/// Boundary points of E(X / s^2) in the plane:
/// x(phi_j) = s * X^{-1/2} (cos phi_j, sin phi_j), phi_j uniform on [0, 2pi).
template <class Scalar>
std::vector<VecX<Scalar>> ellipsoid_boundary_2d(const EllipsoidT<Scalar>& ell,
                                                Scalar scale, Index count) {
  if (ell.X.rows() != 2 || ell.X.cols() != 2) {
    throw ConfigError("ellipsoid_boundary_2d: supported for n = 2 only");
  }
  if (count < 1) throw ConfigError("ellipsoid_boundary_2d: count must be >= 1");
  const MatX<Scalar> Xihalf = inverse_sqrt_spd<Scalar>(ell.X);
  std::vector<VecX<Scalar>> pts;
  pts.reserve(static_cast<std::size_t>(count));
  const Scalar two_pi = Scalar(6.283185307179586476925286766559);
  for (Index j = 0; j < count; ++j) {
    const Scalar phi = two_pi * Scalar(j) / Scalar(count);
    VecX<Scalar> dir(2);
    dir << std::cos(phi), std::sin(phi);
    pts.push_back(scale * (Xihalf * dir));
  }
  return pts;
}

/// One clipped boundary segment of L(H): a piece of the line h_i . x = +/-1.
/// edge_id = 2*i for the +1 side, 2*i + 1 for the -1 side.
template <class Scalar>
struct PolytopeEdgeT {
  Index edge_id = 0;
  VecX<Scalar> p0, p1;
};

using PolytopeEdge = PolytopeEdgeT<double>;

/// Axis-aligned box used to clip polytope boundary lines for export.
struct BoundingBox {
  double x_min = -1, x_max = 1, y_min = -1, y_max = 1;
};

/// Boundary lines of L(H) in the plane, clipped to the box. Rows of H that
/// are numerically zero constrain nothing and produce no edges.
template <class Scalar>
std::vector<PolytopeEdgeT<Scalar>> polytope_edges_2d(
    const PolytopeT<Scalar>& poly, const BoundingBox& box) {
  if (poly.H.cols() != 2 && poly.H.rows() != 0) {
    throw ConfigError("polytope_edges_2d: supported for n = 2 only");
  }
  std::vector<PolytopeEdgeT<Scalar>> edges;
  for (Index i = 0; i < poly.H.rows(); ++i) {
    const Scalar a = poly.H(i, 0);
    const Scalar b = poly.H(i, 1);
    if (std::abs(a) < Scalar(1e-14) && std::abs(b) < Scalar(1e-14)) continue;
    for (int side = 0; side < 2; ++side) {
      const Scalar c = side == 0 ? Scalar(1) : Scalar(-1);
      // Intersect a*x + b*y = c with the four box edges.
      std::vector<VecX<Scalar>> hits;
      auto push = [&](Scalar px, Scalar py) {
        VecX<Scalar> p(2);
        p << px, py;
        for (const auto& q : hits) {
          if ((q - p).cwiseAbs().maxCoeff() < Scalar(1e-12)) return;
        }
        hits.push_back(p);
      };
      if (std::abs(b) > Scalar(1e-14)) {
        for (Scalar px : {Scalar(box.x_min), Scalar(box.x_max)}) {
          const Scalar py = (c - a * px) / b;
          if (py >= Scalar(box.y_min) - Scalar(1e-12) &&
              py <= Scalar(box.y_max) + Scalar(1e-12)) {
            push(px, py);
          }
        }
      }
      if (std::abs(a) > Scalar(1e-14)) {
        for (Scalar py : {Scalar(box.y_min), Scalar(box.y_max)}) {
          const Scalar px = (c - b * py) / a;
          if (px >= Scalar(box.x_min) - Scalar(1e-12) &&
              px <= Scalar(box.x_max) + Scalar(1e-12)) {
            push(px, py);
          }
        }
      }
      if (hits.size() < 2) continue;
      // Take the two extreme intersections along the line direction.
      VecX<Scalar> dir(2);
      dir << -b, a;
      Index lo = 0, hi = 0;
      Scalar tlo = hits[0].dot(dir), thi = tlo;
      for (Index k = 1; k < static_cast<Index>(hits.size()); ++k) {
        const Scalar t = hits[static_cast<std::size_t>(k)].dot(dir);
        if (t < tlo) {
          tlo = t;
          lo = k;
        }
        if (t > thi) {
          thi = t;
          hi = k;
        }
      }
      if (lo == hi) continue;
      PolytopeEdgeT<Scalar> edge;
      edge.edge_id = 2 * i + side;
      edge.p0 = hits[static_cast<std::size_t>(lo)];
      edge.p1 = hits[static_cast<std::size_t>(hi)];
      edges.push_back(std::move(edge));
    }
  }
  return edges;
}

}  // namespace luresid
