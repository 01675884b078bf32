#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "vmfaoa/sensor.hpp"
#include "vmfaoa/vmf.hpp"
#include "test_util.hpp"

using namespace vmfaoa;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kRad = kPi / 180.0;

Anchor rotated_anchor() {
  Anchor a;
  a.position = Eigen::Vector3d(1.0, -2.0, 0.5);
  a.orientation =
      Eigen::AngleAxisd(0.7, Eigen::Vector3d(1.0, 2.0, -1.0).normalized())
          .toRotationMatrix();
  return a;
}

std::string temp_path(const char* name) {
  return std::string("vmfaoa_test_") + name;
}

}  // namespace

TEST_CASE("true_direction matches hand-computed values") {
  Anchor origin;
  const UnitVector3 d = true_direction({0.3, -0.3, -2.0}, origin);
  CHECK_CLOSE(d.x(), 0.14673479, 1e-7);
  CHECK_CLOSE(d.y(), -0.14673479, 1e-7);
  CHECK_CLOSE(d.z(), -0.97823198, 1e-7);
  CHECK_CLOSE(d.norm(), 1.0, 1e-12);

  // Shifting the anchor shifts the frame, not the formula.
  Anchor shifted;
  shifted.position = Eigen::Vector3d(1.0, 1.0, 1.0);
  const UnitVector3 d2 = true_direction({1.3, 0.7, -1.0}, shifted);
  CHECK_CLOSE(d2.x(), d.x(), 1e-12);
  CHECK_CLOSE(d2.y(), d.y(), 1e-12);
  CHECK_CLOSE(d2.z(), d.z(), 1e-12);

  CHECK_THROWS_AS(true_direction(shifted.position, shifted),
                  DegenerateGeometry);
  const double nan = std::nan("");
  CHECK_THROWS_AS(true_direction({nan, 0.0, 0.0}, origin), InvalidArgument);
}

TEST_CASE("ae_predict reports angles in the anchor frame") {
  Anchor origin;
  const AoaAngles a = ae_predict({0.3, -0.3, -2.0}, origin);
  CHECK_CLOSE(a.azimuth, -kPi / 4, 1e-12);
  CHECK_CLOSE(a.elevation, std::asin(-2.0 / std::sqrt(4.18)), 1e-12);

  // With a mounted anchor the prediction is the rotated direction's angles.
  const Anchor anchor = rotated_anchor();
  const Eigen::Vector3d target(4.0, 1.0, -3.0);
  const UnitVector3 local = anchor.orientation * true_direction(target, anchor);
  const AoaAngles b = ae_predict(target, anchor);
  const AoaAngles want = to_angles(local);
  CHECK_CLOSE(b.azimuth, want.azimuth, 1e-12);
  CHECK_CLOSE(b.elevation, want.elevation, 1e-12);
  CHECK(b.is_canonical());
}

TEST_CASE("validate_anchors rejects malformed input") {
  CHECK_THROWS_AS(validate_anchors({}), InvalidArgument);

  Anchor bad_pos;
  bad_pos.position.x() = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate_anchors({bad_pos}), InvalidArgument);

  Anchor bad_rot;
  bad_rot.orientation(0, 0) = 2.0;
  CHECK_THROWS_AS(validate_anchors({bad_rot}), InvalidArgument);

  Anchor reflection;
  reflection.orientation = -RotationMatrix3::Identity();
  CHECK_THROWS_AS(validate_anchors({reflection}), InvalidArgument);

  CHECK_NOTHROW(validate_anchors({Anchor{}, rotated_anchor()}));
}

TEST_CASE("generate_model1 perturbs the predicted angles") {
  const std::vector<Anchor> anchors = {Anchor{}, rotated_anchor()};
  const Eigen::Vector3d target(2.0, 1.5, -0.5);

  // Tiny noise keeps the draw glued to the prediction.
  Rng rng = make_rng(7);
  const EpochMeasurements near =
      generate_model1(target, anchors, {1e-12, 1e-12}, rng);
  REQUIRE(near.size() == 2);
  for (std::size_t j = 0; j < anchors.size(); ++j) {
    const AoaAngles want = ae_predict(target, anchors[j]);
    CHECK(near[j].anchor == static_cast<int>(j));
    CHECK_CLOSE(near[j].angles.azimuth, want.azimuth, 1e-9);
    CHECK_CLOSE(near[j].angles.elevation, want.elevation, 1e-9);
    CHECK(near[j].angles.is_canonical());
  }

  // Same seed, same draw; advancing the stream changes it.
  Rng r1 = make_rng(99), r2 = make_rng(99);
  const auto m1 = generate_model1(target, anchors, {0.1, 0.05}, r1);
  const auto m2 = generate_model1(target, anchors, {0.1, 0.05}, r2);
  CHECK(m1[0].angles.azimuth == m2[0].angles.azimuth);
  CHECK(m1[1].angles.elevation == m2[1].angles.elevation);
  const auto m3 = generate_model1(target, anchors, {0.1, 0.05}, r1);
  CHECK(m3[0].angles.azimuth != m1[0].angles.azimuth);

  // Residual spread matches the requested stds away from the poles.
  const AeNoiseParams params{0.1, 0.05};
  const AoaAngles base = ae_predict(target, anchors[0]);
  Rng rs = make_rng(1234);
  double sa = 0.0, se = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto m = generate_model1(target, {anchors[0]}, params, rs);
    const double da = wrap_angle(m[0].angles.azimuth - base.azimuth);
    const double de = m[0].angles.elevation - base.elevation;
    sa += da * da;
    se += de * de;
  }
  CHECK_CLOSE(std::sqrt(sa / n), params.sigma_azi, 0.003);
  CHECK_CLOSE(std::sqrt(se / n), params.sigma_ele, 0.002);

  Rng rbad = make_rng(1);
  CHECK_THROWS_AS(generate_model1(target, anchors, {0.0, 0.1}, rbad),
                  InvalidArgument);
  CHECK_THROWS_AS(generate_model1(target, anchors, {0.1, -0.1}, rbad),
                  InvalidArgument);
}

TEST_CASE("generate_model2 concentrates on the rotated direction") {
  const std::vector<Anchor> anchors = {rotated_anchor()};
  const Eigen::Vector3d target(3.0, -1.0, 2.0);
  const UnitVector3 mu =
      anchors[0].orientation * true_direction(target, anchors[0]);
  const double kappa = 131.31225400046975;  // 5 degree equivalent

  Rng rng = make_rng(55);
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto m = generate_model2(target, anchors, kappa, rng);
    REQUIRE(m.size() == 1);
    CHECK(m[0].angles.is_canonical());
    acc += to_unit_vector(m[0].angles);
  }
  const Eigen::Vector3d mean = acc / n;
  // Resultant points along mu with length near the mean resultant length.
  CHECK_CLOSE(angle_between(mean.normalized(), mu), 0.0, 0.01);
  CHECK_CLOSE(mean.norm(), mean_resultant_length(kappa), 0.005);

  Rng rbad = make_rng(1);
  CHECK_THROWS_AS(generate_model2(target, anchors, 0.0, rbad),
                  InvalidArgument);
}

TEST_CASE("stacked measurement function and jacobian") {
  const std::vector<Anchor> anchors = {Anchor{}, rotated_anchor()};
  const Eigen::Vector3d target(2.0, -0.5, 1.25);

  const auto [value, jac] = measurement_function_and_jacobian(target, anchors);
  REQUIRE(value.size() == 6);
  REQUIRE(jac.rows() == 6);
  REQUIRE(jac.cols() == 3);

  for (std::size_t j = 0; j < anchors.size(); ++j) {
    const UnitVector3 want =
        anchors[j].orientation * true_direction(target, anchors[j]);
    for (int i = 0; i < 3; ++i) {
      CHECK_CLOSE(value(3 * static_cast<int>(j) + i), want(i), 1e-12);
    }
  }

  // Central differences confirm the analytic jacobian.
  const double eps = 1e-6;
  for (int c = 0; c < 3; ++c) {
    Eigen::Vector3d hi = target, lo = target;
    hi(c) += eps;
    lo(c) -= eps;
    const Eigen::VectorXd vh =
        measurement_function_and_jacobian(hi, anchors).first;
    const Eigen::VectorXd vl =
        measurement_function_and_jacobian(lo, anchors).first;
    for (int r = 0; r < 6; ++r) {
      CHECK_CLOSE(jac(r, c), (vh(r) - vl(r)) / (2 * eps), 1e-6);
    }
  }
}

TEST_CASE("ae_jacobian matches finite differences of ae_predict") {
  const Anchor anchor = rotated_anchor();
  const Eigen::Vector3d target(2.5, 0.5, -1.0);
  const Eigen::Matrix<double, 2, 3> jac = ae_jacobian(target, anchor);

  const double eps = 1e-6;
  for (int c = 0; c < 3; ++c) {
    Eigen::Vector3d hi = target, lo = target;
    hi(c) += eps;
    lo(c) -= eps;
    const AoaAngles ah = ae_predict(hi, anchor);
    const AoaAngles al = ae_predict(lo, anchor);
    CHECK_CLOSE(jac(0, c), wrap_angle(ah.azimuth - al.azimuth) / (2 * eps),
                1e-6);
    CHECK_CLOSE(jac(1, c), (ah.elevation - al.elevation) / (2 * eps), 1e-6);
  }

  // A target straight overhead has no defined azimuth slope.
  Anchor plain;
  CHECK_THROWS_AS(ae_jacobian({0.0, 0.0, 5.0}, plain), PoleSingularity);
}

TEST_CASE("adaptive table lookup picks the nearest node") {
  AdaptiveStdTable table;
  for (int k = 0; k < AdaptiveStdTable::kNodes; ++k) {
    table.node(k) = {k + 1.0, k + 0.5};
  }

  CHECK(table.lookup(0.0).sigma_azi == 91.0);          // node 0 deg
  CHECK(table.lookup(0.4 * kRad).sigma_azi == 91.0);   // rounds to 0
  CHECK(table.lookup(0.6 * kRad).sigma_azi == 92.0);   // rounds to 1
  CHECK(table.lookup(-0.6 * kRad).sigma_azi == 90.0);  // rounds to -1
  CHECK(table.lookup(kPi / 2).sigma_azi == 181.0);     // +90 end
  CHECK(table.lookup(-kPi / 2).sigma_azi == 1.0);      // -90 end

  // Exact half-degree midpoints resolve toward zero.
  CHECK(table.lookup(0.5 * kRad).sigma_azi == 91.0);
  CHECK(table.lookup(-0.5 * kRad).sigma_azi == 91.0);
  CHECK(table.lookup(10.5 * kRad).sigma_azi == 101.0);
  CHECK(table.lookup(-10.5 * kRad).sigma_azi == 81.0);

  CHECK_THROWS_AS(table.lookup(kPi / 2 + 0.01), InvalidArgument);
  CHECK_THROWS_AS(table.lookup(std::nan("")), InvalidArgument);
}

TEST_CASE("build_adaptive_table reproduces the folding geometry") {
  const AeNoiseParams base{10.0 * kRad, 10.0 * kRad};
  const AdaptiveStdTable table = build_adaptive_table(base, 200000, 4242);

  // Flat elevation leaves the noise untouched.
  const AeNoiseParams mid = table.lookup(0.0);
  CHECK_CLOSE(mid.sigma_azi, base.sigma_azi, 0.01 * base.sigma_azi);
  CHECK_CLOSE(mid.sigma_ele, base.sigma_ele, 0.01 * base.sigma_ele);

  // Near the pole half the draws fold, blowing up the azimuth spread and
  // shrinking the (one-sided) elevation spread.
  const AeNoiseParams pole = table.lookup(kPi / 2);
  CHECK(pole.sigma_azi > 2.0);
  CHECK(pole.sigma_azi < 2.25);
  const double want_ele = base.sigma_ele * std::sqrt(1.0 - 2.0 / kPi);
  CHECK_CLOSE(pole.sigma_ele, want_ele, 0.05 * want_ele);

  // Common random numbers make the azimuth column monotone in |elevation|.
  for (int k = 90; k + 1 < AdaptiveStdTable::kNodes; ++k) {
    CHECK(table.node(k + 1).sigma_azi >= table.node(k).sigma_azi - 1e-12);
  }
  for (int k = 0; k + 1 <= 90; ++k) {
    CHECK(table.node(k).sigma_azi >= table.node(k + 1).sigma_azi - 1e-12);
  }

  // Same seed, same table.
  const AdaptiveStdTable again = build_adaptive_table(base, 200000, 4242);
  CHECK(again.node(37).sigma_azi == table.node(37).sigma_azi);
  CHECK(again.node(144).sigma_ele == table.node(144).sigma_ele);

  CHECK_THROWS_AS(build_adaptive_table({0.0, 0.1}, 100, 1), InvalidArgument);
  CHECK_THROWS_AS(build_adaptive_table(base, 1, 1), InvalidArgument);
}

TEST_CASE("adaptive table csv round-trips") {
  const AeNoiseParams base{5.0 * kRad, 3.0 * kRad};
  const AdaptiveStdTable table = build_adaptive_table(base, 5000, 31);
  const std::string path = temp_path("table.csv");
  table.save_csv(path);

  const AdaptiveStdTable loaded = AdaptiveStdTable::load_csv(path);
  for (int k = 0; k < AdaptiveStdTable::kNodes; ++k) {
    CHECK_CLOSE(loaded.node(k).sigma_azi, table.node(k).sigma_azi, 1e-9);
    CHECK_CLOSE(loaded.node(k).sigma_ele, table.node(k).sigma_ele, 1e-9);
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(AdaptiveStdTable::load_csv("no_such_file.csv"), IoError);

  const std::string bad = temp_path("bad.csv");
  {
    std::FILE* f = std::fopen(bad.c_str(), "w");
    std::fputs("elevation_deg,sigma_azi_rad\n-90,0.1,0.1\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(AdaptiveStdTable::load_csv(bad), IoError);
  {
    std::FILE* f = std::fopen(bad.c_str(), "w");
    std::fputs("elevation_deg,sigma_azi_rad,sigma_ele_rad\n-90,0.1,0.1\n", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(AdaptiveStdTable::load_csv(bad), IoError);  // short file
  {
    std::FILE* f = std::fopen(bad.c_str(), "w");
    std::fputs("elevation_deg,sigma_azi_rad,sigma_ele_rad\n", f);
    for (int k = 0; k < AdaptiveStdTable::kNodes; ++k) {
      std::fprintf(f, "%d,%g,%g\n", k - 90, 0.1, k == 50 ? -0.1 : 0.1);
    }
    std::fclose(f);
  }
  CHECK_THROWS_AS(AdaptiveStdTable::load_csv(bad), IoError);  // bad sigma
  std::remove(bad.c_str());
}

TEST_CASE("fit_ae_ml recovers zero-mean spreads") {
  // Truth along +x so the true angles are (0, 0).
  const UnitVector3 x = UnitVector3::UnitX();
  std::vector<std::pair<UnitVector3, AoaAngles>> samples = {
      {x, {0.2, -0.1}},
      {x, {-0.2, 0.1}},
  };
  const AeNoiseParams fit = fit_ae_ml(samples);
  CHECK_CLOSE(fit.sigma_azi, 0.2, 1e-12);
  CHECK_CLOSE(fit.sigma_ele, 0.1, 1e-12);

  // Azimuth residuals wrap across the seam instead of spanning it.
  const UnitVector3 back = to_unit_vector(kPi - 0.1, 0.0);
  std::vector<std::pair<UnitVector3, AoaAngles>> seam = {
      {back, {-kPi + 0.1, 0.0}},
  };
  CHECK_CLOSE(fit_ae_ml(seam).sigma_azi, 0.2, 1e-12);

  // Exact hits floor at a tiny positive value.
  std::vector<std::pair<UnitVector3, AoaAngles>> exact = {{x, {0.0, 0.0}}};
  CHECK(fit_ae_ml(exact).sigma_azi == 1e-9);
  CHECK(fit_ae_ml(exact).sigma_ele == 1e-9);

  CHECK_THROWS_AS(fit_ae_ml({}), InvalidArgument);
}
