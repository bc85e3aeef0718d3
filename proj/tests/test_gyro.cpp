#include <doctest.h>

#include <cmath>

#include "ilnn/gyro.hpp"
#include "oracle.hpp"

using namespace ilnn;

namespace {

double point_diff(const LorentzPoint& a, const LorentzPoint& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.ambient_dim(); ++i) {
    m = std::max(m, std::abs(a.coords().at(i) - b.coords().at(i)));
  }
  return m;
}

}  // namespace

TEST_CASE("gyro identities at the pole") {
  Rng rng(31);
  Curvature k1(-1.0);
  LorentzPoint pole = origin(k1, 3);
  for (int i = 0; i < 50; ++i) {
    LorentzPoint x = oracle::random_point(k1, 3, 1.0, rng);
    CHECK(point_diff(gyro_add(pole, x), x) <= 1e-9);
    CHECK(point_diff(gyro_add(x, pole), x) <= 1e-9);
  }
  LorentzPoint off = origin(Curvature(-2.0), 3);
  CHECK_THROWS_AS(gyro_add(pole, off), ConfigError);
}

TEST_CASE("gyrogroup axioms hold on 1000 random points") {
  Rng rng(32);
  for (double kv : {-0.5, -1.0, -2.25}) {
    Curvature curv(kv);
    LorentzPoint pole = origin(curv, 3);
    for (int i = 0; i < 340; ++i) {
      LorentzPoint x = oracle::random_point(curv, 3, 0.8, rng);
      CHECK(point_diff(gyro_add(pole, x), x) <= 1e-9);             // left identity
      CHECK(point_diff(gyro_add(x, pole), x) <= 1e-9);             // right identity
      CHECK(point_diff(gyro_add(gyro_inverse(x), x), pole) <= 1e-9);  // left inverse
    }
  }
}

TEST_CASE("gyro_scale: unit, zero, exp composition, associativity of scalars") {
  Rng rng(33);
  Curvature k1(-1.0);
  LorentzPoint pole = origin(k1, 2);
  LorentzPoint x = oracle::random_point(k1, 2, 1.0, rng);

  CHECK(point_diff(gyro_scale(1.0, x), x) <= 1e-12);
  CHECK(point_diff(gyro_scale(0.0, x), pole) <= 1e-12);

  TangentVector v = unchecked_tangent(pole, Tensor::from_vector({0.0, 0.4, -0.3}));
  LorentzPoint via_scale = gyro_scale(2.0, exp_map(pole, v));
  LorentzPoint direct = exp_map(pole, unchecked_tangent(pole, 2.0 * v.components()));
  CHECK(point_diff(via_scale, direct) <= 1e-10);

  for (int i = 0; i < 100; ++i) {
    LorentzPoint y = oracle::random_point(k1, 2, 0.8, rng);
    const double s = 2.0 * rng.uniform() - 1.0;
    const double t = 2.0 * rng.uniform() - 1.0;
    CHECK(point_diff(gyro_scale(s * t, y), gyro_scale(s, gyro_scale(t, y))) <= 1e-9);
  }
}

TEST_CASE("gyro_inverse: pole, hand value, involution, agreement with (-1) scaling") {
  Curvature k1(-1.0);
  LorentzPoint pole = origin(k1, 2);
  CHECK(point_diff(gyro_inverse(pole), pole) == 0.0);

  LorentzPoint p = LorentzPoint::from_ambient(
      Tensor::from_vector({std::cosh(1.0), std::sinh(1.0), 0.0}), k1);
  LorentzPoint inv = gyro_inverse(p);
  CHECK(inv.coords().at(0) == doctest::Approx(1.543081).epsilon(1e-6));
  CHECK(inv.coords().at(1) == doctest::Approx(-1.175201).epsilon(1e-6));

  Rng rng(34);
  for (int i = 0; i < 200; ++i) {
    LorentzPoint x = oracle::random_point(k1, 3, 1.2, rng);
    CHECK(point_diff(gyro_inverse(gyro_inverse(x)), x) == 0.0);
    CHECK(point_diff(gyro_inverse(x), gyro_scale(-1.0, x)) <= 1e-10);
  }
}

TEST_CASE("scalar distributivity along geodesics through the pole") {
  // Scalars bounded to keep the scaled points at desk radius; beyond that
  // the comparison drowns in cosh-amplified rounding, not algebra.
  Rng rng(35);
  Curvature k1(-1.0);
  for (int i = 0; i < 300; ++i) {
    LorentzPoint x = oracle::random_point(k1, 3, 0.6, rng);
    const double s = 2.4 * rng.uniform() - 1.2;
    const double t = 2.4 * rng.uniform() - 1.2;
    LorentzPoint lhs = gyro_scale(s + t, x);
    LorentzPoint rhs = gyro_add(gyro_scale(s, x), gyro_scale(t, x));
    CHECK(point_diff(lhs, rhs) <= 1e-8);
  }
}

TEST_CASE("left gyrotranslation preserves squared chord distances") {
  Rng rng(36);
  Curvature k1(-1.0);
  for (int i = 0; i < 250; ++i) {
    LorentzPoint mu = oracle::random_point(k1, 3, 1.0, rng);
    LorentzPoint a = oracle::random_point(k1, 3, 1.0, rng);
    LorentzPoint b = oracle::random_point(k1, 3, 1.0, rng);
    LorentzPoint mu_inv = gyro_inverse(mu);
    const double before = lorentz_sq_chord(a, b).item();
    const double after =
        lorentz_sq_chord(gyro_add(mu_inv, a), gyro_add(mu_inv, b)).item();
    CHECK(std::abs(before - after) <= 1e-9);
  }
}

TEST_CASE("gyro_add agrees with the ball-conjugation route") {
  Rng rng(37);
  for (double kv : {-1.0, -2.0}) {
    Curvature curv(kv);
    for (int i = 0; i < 500; ++i) {
      LorentzPoint x = oracle::random_point(curv, 3, 1.0, rng);
      LorentzPoint y = oracle::random_point(curv, 3, 1.0, rng);
      CHECK(point_diff(gyro_add(x, y), oracle::ball_gyro_add(x, y)) <= 1e-8);
    }
  }
}
