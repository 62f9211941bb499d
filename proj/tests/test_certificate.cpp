#include <doctest.h>

#include <cmath>
#include <vector>

#include "luresid/certificate.hpp"
#include "luresid/model.hpp"
#include "luresid/rng.hpp"
#include "luresid/sector.hpp"
#include "luresid/types.hpp"

using namespace luresid;

namespace {

Certificate make_cert(Mat P, Vec m_diag, Mat L, double s, double alpha) {
  Certificate c;
  c.P = std::move(P);
  c.m_diag = std::move(m_diag);
  c.L = std::move(L);
  c.s = s;
  c.alpha = alpha;
  return c;
}

Certificate scalar_cert(double P, double m, double l, double s, double alpha) {
  return make_cert(Mat::Constant(1, 1, P), Vec::Constant(1, m),
                   Mat::Constant(1, 1, l), s, alpha);
}

Mat random_spd(Index n, CounterRng& rng, double ridge = 0.5) {
  Mat R(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) R(i, j) = rng.uniform(-1, 1);
  }
  return (R * R.transpose() + ridge * Mat::Identity(n, n)).eval();
}

}  // namespace

TEST_CASE("build_F: decoupled scalar blocks") {
  const ModelParams p = ModelParams::zero(Dimensions{1, 1, 1, 1});
  const Certificate c = scalar_cert(1.0, 1.0, 0.0, 1.0, 0.5);
  const Mat F = build_F(p, c);
  REQUIRE(F.rows() == 4);
  Mat expected = Mat::Zero(4, 4);
  expected.diagonal() << -0.25, -1.0, -2.0, -1.0;
  CHECK((F - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("build_F: A enters the corner coupling block") {
  ModelParams p = ModelParams::zero(Dimensions{1, 1, 1, 1});
  p.A(0, 0) = 1.0;
  const Mat F = build_F(p, scalar_cert(1.0, 1.0, 0.0, 1.0, 0.5));
  CHECK(F(0, 3) == 1.0);
  CHECK(F(3, 0) == 1.0);
  CHECK(F(0, 0) == -0.25);
}

TEST_CASE("build_F: bitwise symmetric for random inputs") {
  CounterRng rng(31, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const Dimensions d{2 + static_cast<Index>(rng.next_below(2)), 1, 1,
                       1 + static_cast<Index>(rng.next_below(3))};
    ModelParams p = ModelParams::zero(d);
    for (Mat* M : {&p.A, &p.B, &p.B2, &p.C2, &p.D21}) {
      for (Index j = 0; j < M->cols(); ++j) {
        for (Index i = 0; i < M->rows(); ++i) (*M)(i, j) = rng.uniform(-2, 2);
      }
    }
    Vec md(d.m);
    for (Index i = 0; i < d.m; ++i) md[i] = 0.1 + rng.next_double();
    Mat L(d.m, d.n);
    for (Index j = 0; j < d.n; ++j) {
      for (Index i = 0; i < d.m; ++i) L(i, j) = rng.uniform(-1, 1);
    }
    // P deliberately not symmetric: the assembly must still mirror exactly
    Mat P = random_spd(d.n, rng);
    P(0, d.n - 1) += 1e-3;
    const Mat F = build_F(p, make_cert(P, md, L, 1.0, 0.8));
    for (Index j = 0; j < F.cols(); ++j) {
      for (Index i = 0; i < F.rows(); ++i) {
        CHECK(F(i, j) == F(j, i));
      }
    }
  }
}

TEST_CASE("build_F: shape mismatch throws") {
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  CHECK_THROWS_AS(build_F(p, scalar_cert(1, 1, 0, 1, 0.5)), ConfigError);
}

TEST_CASE("build_G: examples") {
  const Certificate a = scalar_cert(1.0, 1.0, 0.0, 2.0, 0.5);
  const Mat Ga = build_G(a, 0);
  REQUIRE(Ga.rows() == 2);
  CHECK(Ga(0, 0) == 0.25);
  CHECK(Ga(0, 1) == 0.0);
  CHECK(Ga(1, 1) == 1.0);

  const Mat Gb = build_G(scalar_cert(1.0, 1.0, 0.5, 1.0, 0.5), 0);
  CHECK(Gb(0, 1) == 0.5);
  CHECK(Gb(1, 0) == 0.5);
  Eigen::SelfAdjointEigenSolver<Mat> es(Gb);
  CHECK(es.eigenvalues()(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(es.eigenvalues()(1) == doctest::Approx(1.5).epsilon(1e-12));

  const Mat Gc = build_G(scalar_cert(1.0, 1.0, 2.0, 1.0, 0.5), 0);
  CHECK(Gc.determinant() == doctest::Approx(-3.0).epsilon(1e-12));

  CHECK_THROWS_AS(build_G(a, 1), ConfigError);
  CHECK_THROWS_AS(build_G(a, -1), ConfigError);
}

TEST_CASE("check_certificate: diagonal witness passes") {
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  const Certificate c = make_cert(Mat::Identity(2, 2), Vec::Ones(2),
                                  Mat::Zero(2, 2), 1.0, 0.5);
  const auto rep = check_certificate(p, c, 0.5);
  CHECK(rep.f_negative_definite);
  CHECK(rep.g_psd[0]);
  CHECK(rep.g_psd[1]);
  CHECK(rep.delta_ok);  // 0.25 <= 0.75
  CHECK(rep.alpha_ok);
  CHECK(rep.passed());
  CHECK(rep.delta_max == doctest::Approx(std::sqrt(0.75)).epsilon(1e-15));
  CHECK(rep.lambda_min == doctest::Approx(1.0));
  CHECK(rep.lambda_max == doctest::Approx(1.0));
  CHECK((rep.region.X - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rep.H.isZero(0));
}

TEST_CASE("check_certificate: out-of-range alpha is reported, not thrown") {
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  Certificate c = make_cert(Mat::Identity(2, 2), Vec::Ones(2), Mat::Zero(2, 2),
                            1.0, 1.2);
  const auto rep = check_certificate(p, c, 0.0);
  CHECK_FALSE(rep.alpha_ok);
  CHECK_FALSE(rep.passed());
}

TEST_CASE("check_certificate: delta beyond the admissible bound fails") {
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  const Certificate c = make_cert(Mat::Identity(2, 2), Vec::Ones(2),
                                  Mat::Zero(2, 2), 1.0, 0.5);
  const auto rep = check_certificate(p, c, 0.9);  // 0.81 > 0.75
  CHECK_FALSE(rep.delta_ok);
  CHECK_FALSE(rep.passed());
  CHECK_THROWS_AS(check_certificate(p, c, -1.0), ConfigError);
}

TEST_CASE("h_from_certificate: examples") {
  Certificate c = make_cert(Mat::Identity(2, 2), Vec::Ones(1), Mat::Zero(1, 2),
                            1.0, 0.5);
  CHECK(h_from_certificate(c).isZero(0));

  c.L << 0.3, -0.7;
  const Mat h_ident = h_from_certificate(c);
  CHECK(h_ident(0, 0) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(h_ident(0, 1) == doctest::Approx(-0.7).epsilon(1e-15));

  c.P = 2.0 * Mat::Identity(2, 2);
  c.L << 1.0, 0.0;
  const Mat h_diag = h_from_certificate(c);
  CHECK(h_diag(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(h_diag(0, 1) == doctest::Approx(0.0).scale(1));
}

TEST_CASE("iss_bound: examples") {
  Certificate c = make_cert(Mat::Identity(2, 2), Vec::Ones(1), Mat::Zero(1, 2),
                            2.0, 0.5);
  CHECK(iss_bound(c, 1.0, 0.0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(iss_bound(c, 1.0, 0.0, 200) < 1e-15);

  Mat P(2, 2);
  P << 4.0, 0.0, 0.0, 1.0;
  Certificate d = make_cert(P, Vec::Ones(1), Mat::Zero(1, 2), 1.0, 0.5);
  CHECK(iss_bound(d, 1.0, 0.1, 2) ==
        doctest::Approx(0.7309401076758503).epsilon(1e-14));

  CHECK_THROWS_AS(iss_bound(c, -1.0, 0.0, 0), ConfigError);
  Certificate bad = c;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(iss_bound(bad, 1.0, 0.0, 0), ConfigError);
}

TEST_CASE("iss_bound: saturates at the region cap") {
  const Certificate c = make_cert((0.25 * Mat::Identity(2, 2)).eval(),
                                  Vec::Ones(1), Mat::Zero(1, 2), 1.0, 0.9);
  // lambda of P^{-1} is 4, cap = s/sqrt(4) = 0.5
  CHECK(iss_bound(c, 100.0, 0.0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("region LMI matches the Schur-complement scalar test") {
  CounterRng rng(41, 0);
  int boundary_skips = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.next_below(4));
    const Mat P = random_spd(n, rng, 0.2);
    Mat l(1, n);
    for (Index j = 0; j < n; ++j) l(0, j) = rng.uniform(-1.5, 1.5);
    const double s = 0.3 + 2.0 * rng.next_double();
    const Certificate c = make_cert(P, Vec::Ones(1), l, s, 0.5);

    const double scalar = (l * P.llt().solve(l.transpose()))(0, 0);
    const double gap = 1.0 / (s * s) - scalar;
    if (std::abs(gap) <= 1e-9) {
      ++boundary_skips;
      continue;
    }
    Mat G = build_G(c, 0);
    G.diagonal().array() += kPsdShift;
    const bool chol_psd = Eigen::LLT<Mat>(G).info() == Eigen::Success;
    CHECK(chol_psd == (gap > 0.0));
  }
  CHECK(boundary_skips < 5);
}

TEST_CASE("region boundary stays inside the polytope when G holds") {
  CounterRng rng(43, 0);
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  for (int trial = 0; trial < 50; ++trial) {
    const Mat P = random_spd(2, rng, 0.3);
    const double s = 0.5 + rng.next_double();
    Mat L(2, 2);
    for (Index j = 0; j < 2; ++j) {
      for (Index i = 0; i < 2; ++i) L(i, j) = rng.uniform(-1, 1);
    }
    // shrink L until every region LMI holds
    Certificate c = make_cert(P, Vec::Ones(2), L, s, 0.5);
    for (Index i = 0; i < 2; ++i) {
      const double q = (c.L.row(i) * P.llt().solve(c.L.row(i).transpose()))(0);
      const double limit = 1.0 / (s * s);
      if (q > 0.9 * limit) c.L.row(i) *= std::sqrt(0.9 * limit / q);
    }
    const auto rep = check_certificate(p, c, 0.0);
    REQUIRE(rep.g_psd[0]);
    REQUIRE(rep.g_psd[1]);
    for (const auto& x : ellipsoid_boundary_2d(rep.region, 1.0, 64)) {
      CHECK((rep.H * x).cwiseAbs().maxCoeff() <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("global regime: zero L tolerates arbitrarily large s") {
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  Certificate c = make_cert(Mat::Identity(2, 2), Vec::Ones(2), Mat::Zero(2, 2),
                            1.0, 0.9);
  const double delta = 0.1;
  for (int doubling = 0; doubling <= 10; ++doubling) {
    const auto rep = check_certificate(p, c, delta);
    CHECK(rep.passed());
    c.s *= 2.0;
  }
}
