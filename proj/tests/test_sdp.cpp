#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "luresid/certificate.hpp"
#include "luresid/dataset.hpp"
#include "luresid/model.hpp"
#include "luresid/sdp/pipeline.hpp"
#include "luresid/types.hpp"

using namespace luresid;

namespace {

ModelParams unstable_model() {
  ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  p.A = 1.5 * Mat::Identity(2, 2);
  return p;
}

bool bitwise_equal(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) != b(i, j)) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("feasibility_restore: diagonal witness problem is feasible") {
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  const auto res = sdp::feasibility_restore(p, 1.0, 0.9, 0.1);
  REQUIRE(res.status == sdp::SdpStatus::optimal);
  REQUIRE(res.certificate.has_value());
  const Certificate& c = *res.certificate;
  CHECK(c.s == 1.0);
  CHECK(c.alpha == 0.9);
  CHECK(check_certificate(p, c, 0.1).passed());
  // the returned point respects the strict margin on the stability LMI
  const Mat F = build_F(p, c);
  Eigen::SelfAdjointEigenSolver<Mat> es(F);
  CHECK(es.eigenvalues().maxCoeff() <= -0.9e-6);
}

TEST_CASE("feasibility_restore: precondition violations throw") {
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  CHECK_THROWS_AS(sdp::feasibility_restore(p, 1.0, 1.1, 0.1), ConfigError);
  CHECK_THROWS_AS(sdp::feasibility_restore(p, -1.0, 0.9, 0.1), ConfigError);
  // delta^2 > (1 - alpha^2) s^2 is rejected before any solve
  CHECK_THROWS_AS(sdp::feasibility_restore(p, 1.0, 0.9, 0.7), ConfigError);
}

TEST_CASE("feasibility_restore: unstable linear part is infeasible") {
  const auto res = sdp::feasibility_restore(unstable_model(), 1.0, 0.97, 0.0);
  CHECK(res.status == sdp::SdpStatus::infeasible);
  CHECK_FALSE(res.certificate.has_value());
}

TEST_CASE("feasibility_restore: pinned L stays bitwise zero") {
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  sdp::RestoreOptions opt;
  opt.pin_l_zero = true;
  const auto res = sdp::feasibility_restore(p, 1.0, 0.9, 0.1, opt);
  REQUIRE(res.status == sdp::SdpStatus::optimal);
  CHECK(res.certificate->L.isZero(0));
  CHECK(check_certificate(p, *res.certificate, 0.1).passed());
}

TEST_CASE("initialize: prescribed structure and feasibility") {
  const Dimensions dims{2, 1, 1, 2};
  const auto init = sdp::initialize(dims, 1.0, 1.0, 42);
  const ModelParams& p = init.params;
  CHECK(p.A.isApprox(0.9 * Mat::Identity(2, 2)));
  CHECK(p.B2.isZero(0));
  CHECK(p.D.isZero(0));
  CHECK(p.D12.isZero(0));
  CHECK(p.C(0, 0) == 1.0);
  CHECK(p.C(0, 1) == 0.0);
  CHECK((p.C2.array().abs() <= 1.0).all());
  CHECK(init.certificate.alpha == 0.99);
  const double s_min = std::sqrt(1.0 / (1.0 - 0.99 * 0.99));
  CHECK(init.certificate.s == doctest::Approx((1.0 + 0.01) * s_min));

  const auto rep = check_certificate(p, init.certificate, 1.0);
  CHECK(rep.passed());
  CHECK(rep.delta_ok);
  // ball of radius beta = 1: every unit vector lies in the region
  for (double phi = 0.0; phi < 6.28; phi += 0.39) {
    Vec x(2);
    x << std::cos(phi), std::sin(phi);
    CHECK(x.dot(rep.region.X * x) <= 1.0 + 1e-9);
  }
}

TEST_CASE("initialize: deterministic bit-for-bit in the seed") {
  const Dimensions dims{2, 1, 1, 2};
  const auto a = sdp::initialize(dims, 1.0, 1.0, 7);
  const auto b = sdp::initialize(dims, 1.0, 1.0, 7);
  CHECK(bitwise_equal(a.params.C2, b.params.C2));
  CHECK(bitwise_equal(a.params.B, b.params.B));
  CHECK(bitwise_equal(a.params.D21, b.params.D21));
  CHECK(bitwise_equal(a.certificate.P, b.certificate.P));
  CHECK(bitwise_equal(a.certificate.L, b.certificate.L));
  CHECK(bitwise_equal(Mat(a.certificate.m_diag), Mat(b.certificate.m_diag)));
  CHECK(a.certificate.s == b.certificate.s);

  const auto c = sdp::initialize(dims, 1.0, 1.0, 8);
  CHECK_FALSE(bitwise_equal(a.params.C2, c.params.C2));
  CHECK(check_certificate(c.params, c.certificate, 1.0).passed());
}

TEST_CASE("initialize: argument validation") {
  CHECK_THROWS_AS(sdp::initialize(Dimensions{2, 1, 3, 2}, 1.0, {}, 0),
                  ConfigError);
  CHECK_THROWS_AS(sdp::initialize(Dimensions{2, 1, 1, 2}, 0.0, {}, 0),
                  ConfigError);
}

TEST_CASE("initialize: without ball constraint, and pinned L") {
  const Dimensions dims{3, 2, 2, 2};
  const auto plain = sdp::initialize(dims, 0.5, std::nullopt, 3);
  CHECK(check_certificate(plain.params, plain.certificate, 0.5).passed());

  sdp::InitializeOptions opt;
  opt.pin_l_zero = true;
  const auto pinned = sdp::initialize(dims, 0.5, std::nullopt, 3, opt);
  CHECK(pinned.certificate.L.isZero(0));
  CHECK(check_certificate(pinned.params, pinned.certificate, 0.5).passed());
}

TEST_CASE("post_process: benchmark system at alpha = 0.97") {
  const ModelParams p = true_system();
  const auto res = sdp::post_process(p, 0.97, 0.0);
  REQUIRE(res.status == sdp::SdpStatus::optimal);
  REQUIRE(res.certificate.has_value());
  // optimal value frozen from independent solver runs
  CHECK(res.s_hat == doctest::Approx(0.4458342594).epsilon(2e-4));
  CHECK(res.certificate->s == doctest::Approx(1.4976601734).epsilon(1e-4));
  CHECK(res.certificate->L.cwiseAbs().maxCoeff() > 0.1);
  CHECK(check_certificate(p, *res.certificate, 0.0).passed());

  // the amplitude the input-scaling rule derives from this region
  const double amp =
      std::sqrt(res.certificate->s * res.certificate->s * (1.0 - 0.97 * 0.97));
  CHECK(amp == doctest::Approx(0.36409).epsilon(1e-3));
  CHECK(check_certificate(p, *res.certificate, amp * 0.999).passed());
}

TEST_CASE("post_process: input bound at the design amplitude stays feasible") {
  const ModelParams p = true_system();
  const auto res = sdp::post_process(p, 0.97, 0.364);
  REQUIRE(res.status == sdp::SdpStatus::optimal);
  CHECK(res.certificate->s == doctest::Approx(1.4976601734).epsilon(1e-3));
}

TEST_CASE("post_process: globally stable model runs into the scale cap") {
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  sdp::PostProcessOptions opt;
  opt.s_max = 10.0;
  const auto res = sdp::post_process(p, 0.9, 0.1, opt);
  REQUIRE(res.status == sdp::SdpStatus::optimal);
  CHECK(res.certificate->s == doctest::Approx(10.0).epsilon(1e-2));
  CHECK(check_certificate(p, *res.certificate, 0.1).passed());
}

TEST_CASE("post_process: unstable linear part is infeasible") {
  const auto res = sdp::post_process(unstable_model(), 0.97, 0.0);
  CHECK(res.status == sdp::SdpStatus::infeasible);
  CHECK_FALSE(res.certificate.has_value());
  CHECK_FALSE(res.info.message.empty());
}

TEST_CASE("post_process: optimum dominates any restored feasible scale") {
  const ModelParams p = true_system();
  const double alpha = 0.97, delta = 0.1;
  const auto best = sdp::post_process(p, alpha, delta);
  REQUIRE(best.status == sdp::SdpStatus::optimal);
  for (double s : {0.5, 1.0, 1.4}) {
    const auto res = sdp::feasibility_restore(p, s, alpha, delta);
    REQUIRE(res.status == sdp::SdpStatus::optimal);
    CHECK(best.certificate->s >= s * (1.0 - 1e-6));
  }
}

TEST_CASE("post_process: alpha validation") {
  CHECK_THROWS_AS(sdp::post_process(true_system(), 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(sdp::post_process(true_system(), 0.0, 0.0), ConfigError);
}

TEST_CASE("problem dump is self-describing JSON") {
  namespace fs = std::filesystem;
  const fs::path path =
      fs::temp_directory_path() / "luresid_dump_test" / "problem.json";
  fs::create_directories(path.parent_path());

  sdp::PostProcessOptions opt;
  opt.dump_path = path.string();
  const auto res = sdp::post_process(true_system(), 0.97, 0.0, opt);
  REQUIRE(res.status == sdp::SdpStatus::optimal);

  std::ifstream in(path);
  REQUIRE(in.good());
  const auto j = nlohmann::json::parse(in);
  CHECK(j.contains("variables"));
  CHECK(j.contains("blocks"));
  CHECK(j.contains("objective"));
  CHECK(j.at("blocks").is_array());
  CHECK(j.at("blocks").size() >= 3);
  fs::remove_all(path.parent_path());
}

TEST_CASE("run info reports solver effort") {
  // region maximization always runs the path-following phase
  sdp::PostProcessOptions opt;
  opt.s_max = 10.0;
  const auto res = sdp::post_process(ModelParams::zero(Dimensions{2, 1, 1, 2}),
                                     0.9, 0.0, opt);
  REQUIRE(res.status == sdp::SdpStatus::optimal);
  CHECK(res.info.newton_iterations > 0);
  CHECK(res.info.gap >= 0.0);

  // a pure feasibility problem whose trivial start already satisfies every
  // margined block legitimately reports zero Newton steps
  const ModelParams p = ModelParams::zero(Dimensions{2, 1, 1, 2});
  const auto restored = sdp::feasibility_restore(p, 1.0, 0.9, 0.1);
  CHECK(restored.info.status == sdp::SdpStatus::optimal);
  CHECK(restored.info.newton_iterations >= 0);
}
