#include <cmath>

#include "rqt/errors.hpp"
#include "rqt/measurement.hpp"
#include "rqt/spin_algebra.hpp"
#include "test_util.hpp"

using namespace rqt;
using rqt::test::maxabs;

namespace {
const cplx I1(0.0, 1.0);

Vec4 unit_velocity(const Vec3& v) {
  const double g = 1.0 / std::sqrt(1.0 - v.squaredNorm());
  return Vec4(g, g * v(0), g * v(1), g * v(2));
}
Vec4 spatial(const Vec3& m) { return Vec4(0, m(0), m(1), m(2)); }
}  // namespace

TEST_CASE("observables are hermitian for I_u") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(-0.5, 0.5);
  for (int n = 0; n < 30; ++n) {
    const Vec4 u = unit_velocity(Vec3(d(rng), d(rng), d(rng)));
    const Vec4 N(d(rng), d(rng), d(rng), d(rng));
    const SpinObservable o = spin_observable(N, u);
    CHECK(hermiticity_residual(o) < 1e-14);
    // psibar U A psi = psibar N.sbar psi
    const Vec2c psi(cplx(d(rng), d(rng)), cplx(d(rng), d(rng)));
    const cplx lhs = (psi.adjoint() * sigma_bar_dot(u) * o.op * psi)(0, 0);
    Mat2c Ns = Mat2c::Zero();
    for (int I = 0; I < 4; ++I) Ns += lower(N)(I) * sigma_bar(I);
    const cplx rhs = (psi.adjoint() * Ns * psi)(0, 0);
    CHECK(std::abs(lhs - rhs) < 1e-14);
  }
}

TEST_CASE("projectors") {
  const Vec4 u = unit_velocity(Vec3(0.3, 0.1, -0.4));
  SternGerlachSetup sg;
  sg.u = u;
  sg.m = spatial(Vec3(0.0, 0.6, 0.8));
  const SpinOperator op = spin_operator(sg);
  const SpinProjectorPair& p = op.projectors;
  CHECK(maxabs(p.plus * p.plus - p.plus) < 1e-13);
  CHECK(maxabs(p.plus * p.minus) < 1e-13);
  CHECK(maxabs(p.plus + p.minus - Mat2c::Identity()) < 1e-15);
  const Mat2c S = p.plus - p.minus;
  Eigen::ComplexEigenSolver<Mat2c> es(S);
  std::vector<double> ev{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
  std::sort(ev.begin(), ev.end());
  CHECK(ev[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(ev[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(maxabs(S - op.observable.op) < 1e-14);
}

TEST_CASE("rest frame gives cos^2 statistics") {
  for (double th : {0.0, 0.3, 1.2, 2.0, kPi}) {
    SternGerlachSetup sg;
    sg.m = spatial(Vec3(std::sin(th), 0, std::cos(th)));
    const FermionState s{Vec2c(1, 0), HilbertLabel{}};
    const auto [pp, pm] = spin_probabilities(s, spin_operator(sg).projectors);
    // brute force: (1 + m.sigma)/2 on (1, 0)
    Mat2c P = 0.5 * (Mat2c::Identity() + std::sin(th) * pauli(1) + std::cos(th) * pauli(3));
    const double brute = (Vec2c(1, 0).adjoint() * P * Vec2c(1, 0))(0, 0).real();
    CHECK(std::abs(pp - brute) < 1e-12);
    CHECK(std::abs(pp - std::pow(std::cos(th / 2), 2)) < 1e-12);
    CHECK(std::abs(pp + pm - 1.0) < 1e-14);
  }
}

TEST_CASE("comoving apparatus measures along its own axis") {
  const Vec4 u = unit_velocity(Vec3(0.2, 0.3, 0.1));
  const Vec4 m = spatial(Vec3(0, 0, 1));
  SternGerlachSetup sg{m, u, u};
  const Vec4 n = stern_gerlach_axis(sg);
  // n is m projected orthogonal to u and normalised
  const Vec4 proj = m - u * mdot(m, u);
  CHECK(maxabs(n - proj / std::sqrt(-mdot(proj, proj))) < 1e-14);
}

TEST_CASE("stern-gerlach axis approaches m linearly in beta") {
  const Vec4 m = spatial(Vec3(0.6, 0.0, 0.8));
  std::vector<double> b{1e-2, 1e-3, 1e-4}, err;
  for (double beta : b) {
    SternGerlachSetup sg{m, Vec4(1, 0, 0, 0), unit_velocity(beta * Vec3(1, 0, 0))};
    err.push_back(maxabs(stern_gerlach_axis(sg) - m));
  }
  for (int i = 0; i + 1 < 3; ++i)
    CHECK(std::log(err[i] / err[i + 1]) / std::log(b[i] / b[i + 1]) == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("probabilities are lorentz invariant") {
  std::mt19937_64 rng(8);
  const Vec4 u = unit_velocity(Vec3(0.1, 0.2, 0.3));
  SternGerlachSetup sg{spatial(Vec3(0.0, 0.0, 1.0)), unit_velocity(Vec3(-0.2, 0.0, 0.1)), u};
  const FermionState s{Vec2c(cplx(0.3, 0.4), cplx(0.5, -0.2)), HilbertLabel{Event{}, u}};
  const double p0 = spin_probabilities(s, spin_operator(sg).projectors).first;
  for (int n = 0; n < 20; ++n) {
    const auto [L, S] = random_lorentz(rng, 0.7);
    SternGerlachSetup t{L * sg.m, L * sg.v, L * u};
    const FermionState st{S * s.psi, HilbertLabel{Event{}, L * u}};
    CHECK(std::abs(spin_probabilities(st, spin_operator(t).projectors).first - p0) < 1e-12);
  }
}

TEST_CASE("sampled outcomes follow the probabilities") {
  SternGerlachSetup sg;
  sg.m = spatial(Vec3(std::sin(1.0), 0, std::cos(1.0)));
  const FermionState s{Vec2c(1, 0), HilbertLabel{}};
  int plus = 0;
  const int n = 4000;
  for (int k = 0; k < n; ++k) plus += measure_spin(s, sg, k).outcome > 0;
  const double p = std::pow(std::cos(0.5), 2);
  CHECK(std::abs(plus / double(n) - p) < 4 * std::sqrt(p * (1 - p) / n));
  const SpinMeasurement a = measure_spin(s, sg, 42), b = measure_spin(s, sg, 42);
  CHECK(a.outcome == b.outcome);
  // post state is an eigenstate
  const auto [pp, pm] = spin_probabilities(a.post, spin_operator(sg).projectors);
  CHECK(std::max(pp, pm) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("degenerate stern-gerlach setup") {
  const Vec4 u = unit_velocity(Vec3(0.1, 0, 0));
  CHECK_THROWS_AS(stern_gerlach_axis(SternGerlachSetup{u, u, u}), DegenerateSetup);
  CHECK_THROWS_AS(spin_projectors(Vec4(0, 0, 0, 2), Vec4(1, 0, 0, 0)), DomainError);
}

TEST_CASE("photon observables") {
  const Vec4 u(1.0, 0.48, 0.6, 0.64);
  const AdaptationRotation ad = adaptation_rotation(u);
  const Mat4c A = photon_hermitian(0.3, -1.1, cplx(0.2, 0.5), ad);
  CHECK(photon_hermiticity_residual(A) < 1e-15);
  CHECK(photon_gauge_residual(A, u) < 1e-15);
  // acting on Jones components it is the 2x2 matrix [[a, beta], [conj beta, b]]
  const PhotonState s = from_jones(Vec2c(1, 0), HilbertLabel{Event{}, u});
  const PhotonState t{A * s.pol, s.at};
  CHECK(maxabs(jones_vector(t) - Vec2c(0.3, cplx(0.2, -0.5))) < 1e-14);
}

TEST_CASE("malus law") {
  const Vec4 u(1.0, 0.0, 0.6, 0.8);
  const PhotonState s = from_jones(Vec2c(1, 0), HilbertLabel{Event{}, u});
  for (double a : {0.0, 0.4, 1.0, kPi / 2, 2.5}) {
    CHECK(polarizer_probability(s, linear_polarizer(a, u)) == doctest::Approx(std::pow(std::cos(a), 2)).epsilon(1e-13));
  }
  const PhotonState c = from_jones(Vec2c(1, I1) / std::sqrt(2.0), s.at);
  CHECK(polarizer_probability(c, circular_polarizer(+1, u)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(polarizer_probability(c, circular_polarizer(-1, u)) < 1e-15);
  CHECK(polarizer_probability(c, linear_polarizer(0.7, u)) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("polarizer probability ignores gauge") {
  const Vec4 u(1.0, 0.0, 0.6, 0.8);
  PhotonState s = from_jones(Vec2c(0.6, cplx(0, 0.8)), HilbertLabel{Event{}, u});
  const PolarizerVector P = linear_polarizer(0.3, u);
  const double p0 = polarizer_probability(s, P);
  s.pol += cplx(0.7, -2.0) * u.cast<cplx>();
  CHECK(polarizer_probability(s, P) == doctest::Approx(p0).epsilon(1e-13));
}

TEST_CASE("polarization measurement update") {
  const Vec4 u(1.0, 0.0, 0.0, 1.0);
  const PhotonState s = from_jones(Vec2c(0.6, 0.8), HilbertLabel{Event{}, u});
  const PolarizerVector P = linear_polarizer(0.0, u);
  int seen_t = 0, seen_b = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const PolarizationMeasurement m = measure_polarization(s, P, seed);
    CHECK(m.p == doctest::Approx(0.36).epsilon(1e-14));
    const Vec2c j = jones_vector(m.post);
    if (m.transmit) {
      ++seen_t;
      CHECK(std::abs(std::abs(j(0)) - 1.0) < 1e-14);
    } else {
      ++seen_b;
      CHECK(std::abs(std::abs(j(1)) - 1.0) < 1e-14);
    }
  }
  CHECK(seen_t > 0);
  CHECK(seen_b > 0);
}
