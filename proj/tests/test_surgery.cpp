#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "suflow/diagnostics.hpp"
#include "suflow/errors.hpp"
#include "suflow/initial_maps.hpp"
#include "suflow/surgery.hpp"

using namespace suflow;
using oracle::kPi;

namespace {

const std::vector<double> kNorth{0.0, 0.0, 1.0};

std::vector<std::vector<double>> circle_loop(double d, int n) {
  std::vector<std::vector<double>> loop;
  for (int i = 0; i < n; ++i) {
    const double th = 2 * kPi * i / n;
    const std::vector<double> v{d * std::cos(th), d * std::sin(th), 0.0};
    loop.push_back(sphere::exp_point(kNorth, v));
  }
  return loop;
}

CylinderMap theta_wrap(double K) {
  CylinderMap c(256, 513, 0.0, K, 3);
  for (int j = 0; j < c.n_rho; ++j)
    for (int i = 0; i < c.n_theta; ++i) {
      const double th = c.d_theta() * i;
      c.at(i, j)[0] = std::cos(th);
      c.at(i, j)[1] = std::sin(th);
      c.at(i, j)[2] = 0.0;
    }
  return c;
}

CylinderMap rho_linear(double K, double m) {
  CylinderMap c(64, 1025, 0.0, K, 3);
  for (int j = 0; j < c.n_rho; ++j)
    for (int i = 0; i < c.n_theta; ++i) {
      const double a = m * c.rho(j);
      c.at(i, j)[0] = std::sin(a);
      c.at(i, j)[1] = 0.0;
      c.at(i, j)[2] = std::cos(a);
    }
  return c;
}

}  // namespace

TEST_SUITE("surgery") {

TEST_CASE("cylinder energy of closed-form maps") {
  CHECK(theta_wrap(10.0).energy() == doctest::Approx(2 * kPi * 10.0).epsilon(1e-3));
  CHECK(rho_linear(10.0, 0.01).energy() == doctest::Approx(2 * kPi * 10.0 * 1e-4).epsilon(1e-6));
}

TEST_CASE("cone extension reproduces the loop and matches the radial oracle") {
  const auto loop = circle_loop(0.1, 256);
  for (ConeDirection dir : {ConeDirection::inward, ConeDirection::outward}) {
    const CylinderMap c = cone_extension(loop, kNorth, dir);
    const int trace = dir == ConeDirection::inward ? 0 : c.n_rho - 1;
    for (int i = 0; i < c.n_theta; ++i)
      for (int k = 0; k < 3; ++k) CHECK(c.at(i, trace)[k] == loop[i][k]);
    const double d = 0.1;
    auto angle = [&](double r) { return dir == ConeDirection::inward ? (2 - r) * d : (r - 1) * d; };
    const double E = 2 * kPi * oracle::simpson([&](double r) {
      const double s = std::sin(angle(r));
      return (d * d + s * s / (r * r)) * r;
    }, 1.0, 2.0, 2000);
    CHECK(c.energy() == doctest::Approx(E).epsilon(0.01));
  }
}

TEST_CASE("cone extension energy scales with d squared") {
  std::vector<double> ratios;
  for (double d : {0.2, 0.1, 0.05})
    ratios.push_back(cone_extension(circle_loop(d, 256), kNorth, ConeDirection::inward).energy() /
                     (d * d));
  for (double r : ratios) CHECK(r == doctest::Approx(ratios[1]).epsilon(0.2));
  const CylinderMap flat = cone_extension(circle_loop(0.0, 64), kNorth, ConeDirection::outward);
  CHECK(flat.energy() == 0.0);
}

TEST_CASE("squeeze ratios follow the closed forms") {
  for (double K : {20.0, 50.0, 100.0, 400.0}) {
    const CylinderMap a = theta_wrap(K);
    CHECK(squeeze_map(a).energy() / a.energy() == doctest::Approx(1 - 8 / K).epsilon(1e-6));
    const CylinderMap b = rho_linear(K, 0.01);
    CHECK(squeeze_map(b).energy() / b.energy() == doctest::Approx(K / (K - 8)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(squeeze_map(theta_wrap(16.0)), DomainError);
}

TEST_CASE("geodesic neck energy") {
  NeckSpec s;
  s.p = {1.0, 0.0, 0.0};
  s.q = kNorth;
  s.a = 1.0;
  s.b = std::exp(4.0);
  CHECK(geodesic_neck(s).energy() == doctest::Approx(std::pow(kPi, 3) / 8).epsilon(0.01));
  s.p = kNorth;
  CHECK(geodesic_neck(s).energy() == 0.0);
  s.p = {1.0, 0.0, 0.0};
  double prev = 1e9;
  for (double ratio : {4.0, 16.0, 256.0}) {
    s.b = ratio;
    const double E = geodesic_neck(s).energy();
    CHECK(E < prev);
    prev = E;
  }
  s.p = {0.0, 0.0, -1.0};
  CHECK_THROWS_AS(geodesic_neck(s), DomainError);
}

TEST_CASE("neck spec validation") {
  NeckSpec s;
  s.p = kNorth;
  s.q = kNorth;
  s.a = 1.0;
  s.b = 2.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
  s.b = 3.0;
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("competitor without necks is the field") {
  const MapField f = make_fourier_perturbed(TorusGrid::make(32, 1.0), 3, 2, 0.2);
  const Competitor c = build_competitor(f, {});
  CHECK(c.field.values == f.values);
}

TEST_CASE("competitor on the long neck field") {
  const LongNeck ln = make_long_neck(TorusGrid::make(512, 1.0));
  const Competitor c = build_competitor(ln.field, {ln.spec});
  const double Ef = dirichlet_energy(ln.field);
  const double Ec = dirichlet_energy(c.field);
  CHECK(Ec < Ef);
  CHECK(c.energies.cones + c.energies.geodesic < 0.1);
  CHECK(c.field.max_norm_defect() <= 1e-12);
  const Closeness cl = close_maps_homotopic(ln.field, c.field, 0.5, &c.surgery_mask);
  CHECK(cl.close);
  CHECK(cl.max_distance == 0.0);
  // Bit-identical outside the surgery region.
  for (std::size_t n = 0; n < ln.field.nodes(); ++n)
    if (!c.surgery_mask[n])
      for (int k = 0; k < 3; ++k) REQUIRE(c.field.at(n)[k] == ln.field.at(n)[k]);
  CHECK(degree(c.field).integer == degree(ln.field).integer);
}

TEST_CASE("competitor refuses unresolved or overlapping necks") {
  const LongNeck ln = make_long_neck(TorusGrid::make(128, 1.0));
  NeckSpec thin = ln.spec;
  thin.b = thin.a + 4 * ln.field.grid.h();
  CHECK_THROWS_AS(build_competitor(ln.field, {thin}), DomainError);
  CHECK_THROWS_AS(build_competitor(ln.field, {ln.spec, ln.spec}), DomainError);
}

TEST_CASE("reference maps preserve the degree and w tilde carries the geodesic neck") {
  const LongNeck ln = make_long_neck(TorusGrid::make(512, 1.0));
  CHECK_THROWS_AS(build_reference_map(ln.field, {ln.spec}), DomainError);
  // Halve the inner radius so that delta / (lambda R) = 24 leaves room for
  // both collars.
  NeckSpec spec = ln.spec;
  spec.a *= 0.5;
  spec.q = sample_field(ln.field, {spec.center[0] + spec.lambda_R(), spec.center[1]});
  const ReferenceMaps r = build_reference_map(ln.field, {spec});
  CHECK(degree(r.w).integer == degree(ln.field).integer);
  CHECK(degree(r.w_tilde).integer == degree(ln.field).integer);
  CHECK(dirichlet_energy(r.w_tilde) < dirichlet_energy(r.w));
  CHECK(r.w.max_norm_defect() <= 1e-12);
}

TEST_CASE("closeness of maps") {
  const TorusGrid g = TorusGrid::make(32, 1.0);
  const MapField a = make_constant(g, 3);
  Closeness same = close_maps_homotopic(a, a, 0.5);
  CHECK(same.close);
  CHECK(same.max_distance == 0.0);
  MapField b = a;
  for (std::size_t n = 0; n < b.nodes(); ++n) b.at(n)[2] = -1.0;
  const Closeness far = close_maps_homotopic(a, b, 0.5);
  CHECK_FALSE(far.close);
  CHECK(far.max_distance == doctest::Approx(kPi));
  const MapField noisy = perturb_l2(make_fourier_perturbed(g, 3, 1, 0.2), 4, 0.01);
  CHECK(close_maps_homotopic(make_fourier_perturbed(g, 3, 1, 0.2), noisy, 0.5).close);
}

}  // TEST_SUITE
