#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "rqt/errors.hpp"
#include "rqt/interferometry.hpp"
#include "test_util.hpp"

using namespace rqt;
using rqt::test::maxabs;
using rqt::test::share;

namespace {
const cplx I1(0.0, 1.0);
const double kHbar = 1.054571817e-34, kC = 299792458.0, kNeutron = 1.67492749804e-27;

// straight arm and an arm with a sideways excursion that rejoins it at tb
std::pair<Worldline, Worldline> twin_arms(double T, double tb, double eps) {
  auto m = share(minkowski_model());
  const double v = 0.3, g = 1.0 / std::sqrt(1 - v * v);
  const Vec4 u(g, g * v, 0, 0);
  CoordinatePath straight;
  straight.x = [u](double t) { return Vec4(u * t); };
  straight.dx = [u](double) { return u; };
  straight.ddx = [](double) { return Vec4::Zero().eval(); };
  CoordinatePath bent;
  const double w = 2 * kPi / tb;
  bent.x = [=](double t) { return Vec4(u * t + (t < tb ? eps * 0.5 * (1 - std::cos(w * t)) : 0.0) * Vec4(0, 0, 1, 0)); };
  bent.dx = [=](double t) { return Vec4(u + (t < tb ? eps * 0.5 * w * std::sin(w * t) : 0.0) * Vec4(0, 0, 1, 0)); };
  bent.ddx = [=](double t) { return Vec4((t < tb ? eps * 0.5 * w * w * std::cos(w * t) : 0.0) * Vec4(0, 0, 1, 0)); };
  return {worldline_from_path(m, WorldlineKind::timelike, straight, 0.0, T, 41),
          worldline_from_path(m, WorldlineKind::timelike, bent, 0.0, T, 41)};
}

Worldline ray(const Vec4& x0, const Vec4& k, double L) {
  CoordinatePath p;
  p.x = [=](double s) { return Vec4(x0 + k * s); };
  p.dx = [=](double) { return k; };
  p.ddx = [](double) { return Vec4::Zero().eval(); };
  return worldline_from_path(share(minkowski_model()), WorldlineKind::null, p, 0.0, L, 9);
}
}  // namespace

TEST_CASE("photon arms have no internal phase") {
  const Worldline w = ray(Vec4::Zero(), Vec4(2, 0, 2, 0), 3.0);
  const PhaseLedger l = arm_phase(w, no_field(), Particle{ParticleKind::photon, 0.0, 0.0});
  CHECK(l.theta_int == 0.0);
  CHECK(maxabs(l.k_lower - Vec4(2, 0, -2, 0)) < 1e-15);
  CHECK_THROWS_AS(arm_phase(w, no_field(), Particle{}), InvalidArgument);
}

TEST_CASE("fermion internal phase is m times proper time") {
  const auto [a, b] = twin_arms(4.0, 2.0, 0.1);
  const PhaseLedger l = arm_phase(a, no_field(), Particle{ParticleKind::fermion, 3.0, 0.0});
  CHECK(l.theta_int == doctest::Approx(12.0).epsilon(1e-13));
  // constant A_t adds e A_t dt
  EMField em;
  em.F = [](const Event&) { return Mat4::Zero().eval(); };
  em.A = [](const Event&) { return Vec4(0.25, 0, 0, 0); };
  const PhaseLedger c = arm_phase(a, em, Particle{ParticleKind::fermion, 3.0, 2.0});
  const double dt = a.samples().back().x.x(0);
  CHECK(c.theta_int == doctest::Approx(12.0 + 2.0 * 0.25 * dt).epsilon(1e-13));
}

TEST_CASE("identical arms give zero phase difference") {
  const auto [a, b] = twin_arms(4.0, 2.0, 0.1);
  const Particle p{ParticleKind::fermion, 5.0, 0.0};
  const PhaseLedger l = arm_phase(a, no_field(), p);
  CHECK(phase_difference(l, l, l.k_lower, Vec4::Zero()) == 0.0);
}

TEST_CASE("twin arms: proper-time deficit and endpoint-slide invariance") {
  const double m = 40.0;
  const auto [a, b] = twin_arms(4.0, 2.0, 0.3);
  const Particle p{ParticleKind::fermion, m, 0.0};
  const PhaseLedger la = arm_phase(a, no_field(), p, 1);
  const PhaseLedger lb = arm_phase(b, no_field(), p, 2);
  const double d0 = phase_difference(la, lb, la.k_lower, Vec4::Zero());
  CHECK(d0 < 0.0);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> slide(2.2, 4.0);
  for (int n = 0; n < 10; ++n) {
    const PhaseLedger sa = arm_phase(a, no_field(), p, 1, slide(rng));
    const PhaseLedger sb = arm_phase(b, no_field(), p, 2, slide(rng));
    CHECK(std::abs(phase_difference(sa, sb, sa.k_lower, Vec4::Zero()) - d0) < 1e-9);
  }
}

TEST_CASE("photon displacement phase is distance over reduced wavelength") {
  const double w = 3.0, d = 0.7;
  const Vec4 k(w, 0, w * 0.6, w * 0.8);
  const Vec3 kh(0, 0.6, 0.8);
  const Worldline a = ray(Vec4::Zero(), k, 2.0);
  Vec4 x2 = Vec4::Zero();
  x2.tail<3>() = d * kh;
  const Worldline b = ray(x2, k, 2.0);
  const Particle ph{ParticleKind::photon, 0.0, 0.0};
  const PhaseLedger la = arm_phase(a, no_field(), ph), lb = arm_phase(b, no_field(), ph);
  CHECK(phase_difference(la, lb, la.k_lower, Vec4::Zero()) == doctest::Approx(d * w).epsilon(1e-13));
  // slide along the null rays
  for (double s1 : {0.3, 1.1, 2.0})
    for (double s2 : {0.5, 1.7}) {
      const PhaseLedger sa = arm_phase(a, no_field(), ph, 1, s1), sb = arm_phase(b, no_field(), ph, 2, s2);
      CHECK(phase_difference(sa, sb, sa.k_lower, Vec4::Zero()) == doctest::Approx(d * w).epsilon(1e-12));
    }
}

TEST_CASE("fermion displacement phase is |p| d") {
  const double m = 2.0, v = 0.6, g = 1.25, d = 0.4;
  auto mk = [&](double x0) {
    CoordinatePath p;
    p.x = [=](double t) { return Vec4(g * t, x0 + g * v * t, 0, 0); };
    p.dx = [=](double) { return Vec4(g, g * v, 0, 0); };
    p.ddx = [](double) { return Vec4::Zero().eval(); };
    return worldline_from_path(share(minkowski_model()), WorldlineKind::timelike, p, 0.0, 1.0, 5);
  };
  const Particle p{ParticleKind::fermion, m, 0.0};
  const PhaseLedger la = arm_phase(mk(0.0), no_field(), p), lb = arm_phase(mk(d), no_field(), p);
  const PhaseDecomposition dec = decompose_phase(la, lb, la.k_lower, Vec4::Zero());
  CHECK(dec.internal == doctest::Approx(0.0));
  CHECK(dec.displacement == doctest::Approx(m * g * v * d).epsilon(1e-13));
}

TEST_CASE("strict policy rejects different wavevectors") {
  const Particle ph{ParticleKind::photon, 0.0, 0.0};
  const PhaseLedger a = arm_phase(ray(Vec4::Zero(), Vec4(1, 1, 0, 0), 1.0), no_field(), ph);
  const PhaseLedger b = arm_phase(ray(Vec4::Zero(), Vec4(1, 0, 1, 0), 1.0), no_field(), ph);
  CHECK_THROWS_AS(phase_difference(a, b, a.k_lower, Vec4::Zero()), WavevectorMismatch);
  CHECK_NOTHROW(phase_difference(a, b, a.k_lower, Vec4::Zero(), WavevectorPolicy::relaxed));
}

TEST_CASE("aharonov-bohm loop gives the enclosed flux") {
  const double B = 0.8, R = 0.5, T = 3.0, q = 1.5;
  EMField em = uniform_field(Vec3::Zero(), Vec3(0, 0, B));
  em.A = [B](const Event& e) { return Vec4(0, B * e.x(2) / 2, -B * e.x(1) / 2, 0); };
  auto half = [&](double sgn) {
    CoordinatePath p;
    const double w = kPi / T;
    p.x = [=](double t) { return Vec4(t, -R * std::cos(w * t), sgn * R * std::sin(w * t), 0); };
    p.dx = [=](double t) { return Vec4(1, R * w * std::sin(w * t), sgn * R * w * std::cos(w * t), 0); };
    p.ddx = [=](double t) { return Vec4(0, R * w * w * std::cos(w * t), -sgn * R * w * w * std::sin(w * t), 0); };
    return worldline_from_path(share(minkowski_model()), WorldlineKind::timelike, p, 0.0, T, 21);
  };
  // arm 2 below, arm 1 above: the loop runs counterclockwise; A_i dx^i = -A.dl
  CHECK(aharonov_bohm_phase(half(1.0), half(-1.0), em, q) == doctest::Approx(-q * B * kPi * R * R).epsilon(1e-10));
}

TEST_CASE("transport phase") {
  const FermionState a{Vec2c(0.6, 0.8), HilbertLabel{}};
  CHECK(transport_phase(a, a) == doctest::Approx(0.0));
  FermionState b = a;
  b.psi *= std::polar(1.0, 0.9);
  CHECK(transport_phase(a, b) == doctest::Approx(0.9).epsilon(1e-14));
  const FermionState c{Vec2c(0.8, -0.6), HilbertLabel{}};
  CHECK_THROWS_AS(transport_phase(a, c), OrthogonalStates);
  const FermionState r{Vec2c(0.8, 0.6 * I1), HilbertLabel{}};
  CHECK(transport_phase(a, r) == doctest::Approx(std::arg(inner_product(a, r))).epsilon(1e-14));
}

TEST_CASE("recombination probabilities") {
  const cplx s = I1 / std::sqrt(2.0);
  const FermionState up{Vec2c(1, 0), HilbertLabel{}}, down{Vec2c(0, 1), HilbertLabel{}};
  CHECK(recombine(up, up, s, s, 0.0).probability == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(recombine(up, up, s, s, kPi).probability < 1e-15);
  for (double th : {0.0, 1.0, 2.5}) CHECK(recombine(up, down, s, s, th).probability == doctest::Approx(0.5));
  FermionState ph = up;
  ph.psi *= std::polar(1.0, 0.4);
  for (double th : {0.0, 0.7, 2.0, 4.0})
    CHECK(recombine(up, ph, s, s, th).probability == doctest::Approx(0.5 * (1 + std::cos(th + 0.4))).epsilon(1e-14));
  const PhotonState p = from_jones(Vec2c(1, 0), HilbertLabel{Event{}, Vec4(1, 0, 0, 1)});
  CHECK(recombine(p, p, s, s, kPi / 2).probability == doctest::Approx(0.5).epsilon(1e-14));
  const FermionState moved{Vec2c(1, 0), HilbertLabel{Event{Vec4(1, 0, 0, 0), ChartId{}}, Vec4(1, 0, 0, 0)}};
  CHECK_THROWS_AS(recombine(up, moved, s, s, 0.0), HilbertSpaceMismatch);
}

TEST_CASE("interfere combines the three phases") {
  const auto [a, b] = twin_arms(4.0, 2.0, 0.2);
  const Particle p{ParticleKind::fermion, 10.0, 0.0};
  const PhaseLedger la = arm_phase(a, no_field(), p, 1), lb = arm_phase(b, no_field(), p, 2);
  const HilbertLabel at = label_at(a.samples().back());
  const FermionState s1{Vec2c(1, 0), at}, s2{Vec2c(std::polar(0.8, 0.3), 0.6), at};
  const InterferometerResult r = interfere(la, lb, s1, s2, la.k_lower, Vec4::Zero());
  CHECK(r.delta_theta_tot == doctest::Approx(r.delta_theta + std::arg(inner_product(s1, s2))));
  CHECK(std::norm(r.a) + std::norm(r.b) == doctest::Approx(1.0));
  CHECK(r.probability >= 0.0);
  CHECK(r.probability <= 1.0);
}

TEST_CASE("cow phase: thermal neutron fixture") {
  const double m = kNeutron * kC / kHbar, v1 = 2200.0 / kC, g = 9.8 / (kC * kC);
  const double std_phase = cow_phase(m, v1, 0.02, 0.1, g, CowMode::standard);
  // m dz ell g / (hbar v1) in SI, oracle value from 40-digit arithmetic
  CHECK(std::abs(std_phase / 141.49895820869016695 - 1.0) < 1e-12);
  const double exact = cow_phase(m, v1, 0.02, 0.1, g, CowMode::exact);
  CHECK(std::abs(exact / 141.49896107756185262 - 1.0) < 1e-12);
  const double x = 0.02 * g / (v1 * v1);
  CHECK(std::abs(exact / std_phase - 1.0) < x);
  CHECK(std::abs(exact / std_phase - 1.0) > 0.25 * x);
  for (CowMode md : {CowMode::exact, CowMode::weak_field, CowMode::nonrel, CowMode::nonrel_g2, CowMode::standard})
    CHECK(cow_phase(m, v1, 0.0, 0.1, g, md) == 0.0);
  CHECK_THROWS_AS(cow_phase(m, v1, 1e9, 0.1, g, CowMode::exact), ComplexVelocity);
  CHECK_THROWS_AS(cow_phase(m, v1, 1e9, 0.1, g, CowMode::weak_field), ComplexVelocity);
  CHECK_THROWS_AS(cow_phase(m, 1.5, 0.02, 0.1, g, CowMode::exact), DomainError);
}

TEST_CASE("cow limit ladder slopes in 50-digit arithmetic") {
  using R = boost::multiprecision::cpp_bin_float_50;
  const R c(299792458), m = R("1.67492749804e-27") * c / R("1.054571817e-34");
  const R v1 = R(2200) / c, g = R("9.8") / (c * c), ell = R("0.1");
  std::vector<double> dz{2e-2, 2e-3, 2e-4, 2e-5, 2e-6};
  std::array<std::vector<double>, 4> diff;
  for (double z : dz) {
    const R Z(z);
    const R ex = cow_phase<R>(m, v1, Z, ell, g, CowMode::exact);
    const R wk = cow_phase<R>(m, v1, Z, ell, g, CowMode::weak_field);
    const R nr = cow_phase<R>(m, v1, Z, ell, g, CowMode::nonrel);
    const R n2 = cow_phase<R>(m, v1, Z, ell, g, CowMode::nonrel_g2);
    const R st = cow_phase<R>(m, v1, Z, ell, g, CowMode::standard);
    diff[0].push_back(static_cast<double>(abs(ex - wk)));
    diff[1].push_back(static_cast<double>(abs(wk - n2)));
    diff[2].push_back(static_cast<double>(abs(n2 - st)));
    diff[3].push_back(static_cast<double>(abs(nr - n2)));
  }
  const std::array<double, 4> power{2.0, 1.0, 2.0, 3.0};
  for (int k = 0; k < 4; ++k) {
    const double slope = std::log(diff[k].front() / diff[k].back()) / std::log(dz.front() / dz.back());
    CHECK(slope == doctest::Approx(power[k]).epsilon(0.05));
  }
}

TEST_CASE("cow phase from rindler worldlines matches the closed form") {
  const double m = 20.0, v1 = 0.5, dz = 0.5, ell = 1.0, g = 0.1;
  const CowWorldlineResult r = cow_phase_worldlines(m, v1, dz, ell, g);
  CHECK(r.delta_theta == doctest::Approx(cow_phase(m, v1, dz, ell, g, CowMode::exact)).epsilon(1e-10));
  CHECK(r.v2 < v1);
}

TEST_CASE("cow mode names") {
  for (CowMode md : {CowMode::exact, CowMode::weak_field, CowMode::nonrel, CowMode::nonrel_g2, CowMode::standard})
    CHECK(parse_cow_mode(to_string(md)) == md);
  CHECK_THROWS_AS(parse_cow_mode("bogus"), InvalidArgument);
}
