#include <cmath>

#include "rqt/errors.hpp"
#include "rqt/geometry.hpp"
#include "rqt/spin_algebra.hpp"
#include "test_util.hpp"

using namespace rqt;
using rqt::test::maxabs;

namespace {

// boost along x with rapidity 0.3 z, then rotation about z by 0.5 x
Mat4 lorentz_field(const Vec4& x) {
  const double r = 0.3 * x(3), a = 0.5 * x(1);
  Mat4 B = Mat4::Identity();
  B(0, 0) = B(1, 1) = std::cosh(r);
  B(0, 1) = B(1, 0) = std::sinh(r);
  Mat4 R = Mat4::Identity();
  R(1, 1) = R(2, 2) = std::cos(a);
  R(1, 2) = -std::sin(a);
  R(2, 1) = std::sin(a);
  return R * B;
}

}  // namespace

TEST_CASE("schwarzschild metric at r = 10M") {
  const SpacetimeModel s = schwarzschild_model(1.0);
  const Mat4 g = s.metric(s.event(Vec4(0, 10, kPi / 2, 0)));
  CHECK(g(0, 0) == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(g(1, 1) == doctest::Approx(-1.25).epsilon(1e-14));
  CHECK(g(2, 2) == doctest::Approx(-100.0).epsilon(1e-14));
  CHECK(maxabs(g - g.transpose()) == 0.0);
}

TEST_CASE("rindler connection is the acceleration") {
  const double g = 0.25;
  const SpacetimeModel r = rindler_model(g);
  for (double z : {0.0, 1.0, -2.0}) {
    const Connection w = r.connection(r.event(Vec4(0.3, 0.1, 0.2, z)));
    CHECK(w[0](0, 3) == doctest::Approx(g).epsilon(1e-13));
    CHECK(w[0](3, 0) == doctest::Approx(g).epsilon(1e-13));
    Mat4 rest = w[0];
    rest(0, 3) = rest(3, 0) = 0.0;
    CHECK(maxabs(rest) < 1e-14);
    for (int m = 1; m < 4; ++m) CHECK(maxabs(w[m]) < 1e-14);
  }
}

TEST_CASE("schwarzschild connection closed forms") {
  const SpacetimeModel s = schwarzschild_model(1.0);
  const double r = 10.0, th = 1.0, f = 0.8;
  const Connection w = s.connection(s.event(Vec4(0, r, th, 0)));
  CHECK(w[0](0, 1) == doctest::Approx(1.0 / (r * r)).epsilon(1e-12));
  CHECK(w[2](2, 1) == doctest::Approx(std::sqrt(f)).epsilon(1e-12));
  CHECK(w[3](3, 1) == doctest::Approx(std::sin(th) * std::sqrt(f)).epsilon(1e-12));
  CHECK(w[3](3, 2) == doctest::Approx(std::cos(th)).epsilon(1e-12));
}

TEST_CASE("connection is metric compatible") {
  const SpacetimeModel s = schwarzschild_model(2.0);
  const Connection w = s.connection(s.event(Vec4(1.0, 7.3, 0.8, 2.1)));
  for (int m = 0; m < 4; ++m) {
    const Mat4 l = lowered(w[m]);
    CHECK(maxabs(l + l.transpose()) < 1e-14);
  }
}

TEST_CASE("analytic and finite-difference connections agree") {
  for (const SpacetimeModel& m : {schwarzschild_model(1.0), rindler_model(0.4)}) {
    const Event e = m.event(m.name() == "rindler" ? Vec4(0.2, 0.3, -0.1, 0.7)
                                                  : Vec4(0.0, 6.5, 1.1, 0.4));
    const Connection a = m.connection(e);
    const Connection f = m.with_mode(ConnectionMode::finite_difference).connection(e);
    for (int mu = 0; mu < 4; ++mu) CHECK(maxabs(a[mu] - f[mu]) < 1e-6);
  }
}

TEST_CASE("connection transforms inhomogeneously under local lorentz") {
  const SpacetimeModel base = schwarzschild_model(1.0);
  LocalLorentzField fld;
  fld.lambda = lorentz_field;
  const SpacetimeModel moved = apply_local_lorentz(base, fld);
  const Vec4 x(0.0, 8.0, 1.2, 0.3);
  const Event e = base.event(x);
  CHECK(is_proper_lorentz(lorentz_field(x)));
  std::array<Mat4, 4> dl;
  for (int n = 0; n < 4; ++n) dl[n] = central_diff4(lorentz_field, x, n, 1e-4);
  const Connection expect = transform_connection(base.connection(e), lorentz_field(x), dl);
  const Connection got = moved.connection(moved.event(x));
  for (int mu = 0; mu < 4; ++mu) CHECK(maxabs(got[mu] - expect[mu]) < 1e-7);
  // metric is gauge independent
  CHECK(maxabs(moved.metric(e) - base.metric(e)) < 1e-12);
}

TEST_CASE("tabulated tetrad reproduces rindler at nodes") {
  const SpacetimeModel r = rindler_model(0.2);
  TetradGrid grid;
  grid.lo = {-1, -1, -1, -1};
  grid.hi = {1, 1, 1, 1};
  grid.n = {3, 3, 3, 9};
  for (int l = 0; l < 9; ++l)
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i)
          grid.samples.push_back(r.tetrad(r.event(Vec4(-1 + i, -1 + j, -1 + k, -1 + 0.25 * l))));
  const SpacetimeModel t = tabulated_model("rindler-grid", grid);
  const Vec4 node(0, 0, 0, 0.5);
  CHECK(maxabs(t.tetrad(t.event(node)) - r.tetrad(r.event(node))) < 1e-15);
  // between nodes the linear interpolant of 1/(1+gz) is close but not exact
  const Vec4 mid(0, 0, 0, 0.625);
  CHECK(maxabs(t.tetrad(t.event(mid)) - r.tetrad(r.event(mid))) < 1e-3);
  CHECK_THROWS_AS(t.tetrad(t.event(Vec4(0, 0, 0, 1.5))), DomainError);
}

TEST_CASE("domain and parameter errors") {
  CHECK_THROWS_AS(make_builtin_model("kerr", {1.0}), InvalidArgument);
  CHECK_THROWS_AS(make_builtin_model("rindler", {}), InvalidArgument);
  CHECK_THROWS_AS(make_builtin_model("rindler", {-1.0}), DomainError);
  const SpacetimeModel s = make_builtin_model("schwarzschild", {1.0});
  CHECK_THROWS_AS(s.metric(s.event(Vec4(0, 1.5, 1.0, 0))), DomainError);
  CHECK_THROWS_AS(s.metric(s.event(Vec4(0, 5.0, 0.0, 0))), DomainError);
  const SpacetimeModel m = minkowski_model();
  CHECK_THROWS_AS(s.metric(m.event(Vec4(0, 5.0, 1.0, 0))), DomainError);
  const SpacetimeModel r = rindler_model(1.0);
  CHECK_THROWS_AS(r.metric(r.event(Vec4(0, 0, 0, -1.5))), DomainError);
}

TEST_CASE("lorentz inverse") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const Mat4 L = random_lorentz(rng, 1.0).first;
    CHECK(is_proper_lorentz(L, 1e-11));
    CHECK(maxabs(lorentz_inverse(L) * L - Mat4::Identity()) < 1e-12);
  }
}
