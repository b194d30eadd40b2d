#include <cmath>
#include <random>

#include "rqt/composite.hpp"
#include "rqt/errors.hpp"
#include "rqt/measurement.hpp"
#include "rqt/spin_algebra.hpp"
#include "test_util.hpp"

using namespace rqt;
using rqt::test::maxabs;
using rqt::test::share;

namespace {
const cplx I1(0.0, 1.0);

Vec4 unit_velocity(const Vec3& v) {
  const double g = 1.0 / std::sqrt(1.0 - v.squaredNorm());
  return Vec4(g, g * v(0), g * v(1), g * v(2));
}

std::shared_ptr<const SpacetimeModel> schw() {
  static auto m = share(schwarzschild_model(1.0));
  return m;
}

Worldline leg(const Vec4& x0, const Vec3& v, double span) {
  return integrate_timelike(schw(), no_field(), schw()->event(x0), unit_velocity(v), 0.0, span, 1e-12);
}

// rest-frame singlet components lifted to the two labels
BipartiteState lifted_singlet(const HilbertLabel& a, const HilbertLabel& b) {
  BipartiteState s = singlet(a.x, b.x);
  s = apply_local(s, 0, spin_half_boost(a.u), a);
  return apply_local(s, 1, spin_half_boost(b.u), b);
}

Mat2c rest_up() { return spin_projectors(Vec4(0, 0, 0, 1), Vec4(1, 0, 0, 0)).plus; }
}  // namespace

TEST_CASE("singlet and triplet") {
  const BipartiteState s = singlet(Event{}, Event{});
  CHECK(bipartite_norm_squared(s) == doctest::Approx(1.0).epsilon(1e-15));
  BipartiteState t = s;
  t.coeffs(1, 0) = -t.coeffs(1, 0);
  CHECK(std::abs(bipartite_inner_product(s, t)) < 1e-15);
}

TEST_CASE("boosted labels reproduce the rest-frame inner product") {
  std::mt19937_64 rng(21);
  BipartiteState a = singlet(Event{}, Event{});
  BipartiteState b = product_state(FermionState{Vec2c(0.6, 0.8), HilbertLabel{}},
                                   FermionState{Vec2c(cplx(0, 0.8), 0.6), HilbertLabel{}});
  const cplx rest = bipartite_inner_product(a, b);
  for (int n = 0; n < 10; ++n) {
    const auto [L1, S1] = random_lorentz(rng, 0.6);
    const auto [L2, S2] = random_lorentz(rng, 0.6);
    auto boost = [&](BipartiteState s) {
      s = apply_local(s, 0, S1, HilbertLabel{Event{}, L1 * Vec4(1, 0, 0, 0)});
      return apply_local(s, 1, S2, HilbertLabel{Event{}, L2 * Vec4(1, 0, 0, 0)});
    };
    CHECK(std::abs(bipartite_inner_product(boost(a), boost(b)) - rest) < 1e-12);
  }
}

TEST_CASE("local evolutions commute and preserve the norm") {
  const Worldline w1 = leg(Vec4(0, 8, kPi / 2, 0), Vec3(0.2, 0.1, 0.3), 10.0);
  const Worldline w2 = leg(Vec4(0, 8, kPi / 2, 0), Vec3(-0.1, 0.3, -0.2), 12.0);
  const BipartiteState s0 = singlet(w1.samples().front().x, w2.samples().front().x);
  const BipartiteState s = lifted_singlet(label_at(w1.samples().front()), label_at(w2.samples().front()));
  const BipartiteState a = evolve_local(evolve_local(s, 0, w1, no_field(), 0.0, 1e-12), 1, w2, no_field(), 0.0, 1e-12);
  const BipartiteState b = evolve_local(evolve_local(s, 1, w2, no_field(), 0.0, 1e-12), 0, w1, no_field(), 0.0, 1e-12);
  CHECK(maxabs(a.coeffs - b.coeffs) < 1e-10);
  CHECK(bipartite_norm_squared(a) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(evolve_local(s0, 0, w1, no_field(), 0.0, 1e-12), HilbertSpaceMismatch);
}

TEST_CASE("same flat path keeps a singlet a singlet") {
  auto m = share(minkowski_model());
  const Worldline w = circular_orbit(m, 1.0, 0.5, 0.3);
  const HilbertLabel at = label_at(w.samples().front());
  const BipartiteState s = lifted_singlet(at, at);
  // the singlet is invariant under S x S with det S = 1
  CHECK(maxabs(s.coeffs - singlet(at.x, at.x).coeffs) < 1e-14);
  const BipartiteState e = evolve_local(evolve_local(s, 0, w, no_field(), 0.0, 1e-12), 1, w, no_field(), 0.0, 1e-12);
  // back to rest-frame components at the end
  const Mat2c Bi = spin_half_boost(e.labels[0].u).inverse();
  const Eigen::MatrixXcd rest = Bi * e.coeffs * Bi.transpose();
  CHECK(maxabs(rest - s.coeffs) < 1e-10);
}

TEST_CASE("antisymmetry survives identical local evolutions") {
  auto m = share(minkowski_model());
  const Worldline w = circular_orbit(m, 2.0, 0.3, 0.2);
  const HilbertLabel at = label_at(w.samples().front());
  BipartiteState s = lifted_singlet(at, at);
  s.coeffs *= std::polar(1.0, 0.3);
  const BipartiteState e = evolve_local(evolve_local(s, 0, w, no_field(), 0.0, 1e-12), 1, w, no_field(), 0.0, 1e-12);
  CHECK(maxabs(e.coeffs + e.coeffs.transpose()) < 1e-12);
}

TEST_CASE("projection on one slot") {
  const FermionState up{Vec2c(1, 0), HilbertLabel{}}, x{Vec2c(1, 1) / std::sqrt(2.0), HilbertLabel{}};
  const BipartiteState p = product_state(up, x);
  const SlotProjection a = project_slot(p, 0, rest_up());
  CHECK(a.probability == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(maxabs(a.state.coeffs - p.coeffs) < 1e-15);
  const SlotProjection b = project_slot(singlet(Event{}, Event{}), 0, rest_up());
  CHECK(b.probability == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::abs(b.state.coeffs(0, 1) - 1.0) < 1e-15);
  CHECK(maxabs(b.state.coeffs) == doctest::Approx(1.0));
  const SlotProjection z = project_slot(product_state(FermionState{Vec2c(0, 1), HilbertLabel{}}, x), 0, rest_up());
  CHECK(z.null_branch);
}

TEST_CASE("no signalling and projection commutes with the other slot") {
  const Worldline w2 = leg(Vec4(0, 8, kPi / 2, 0), Vec3(-0.1, 0.3, -0.2), 12.0);
  BipartiteState s = lifted_singlet(HilbertLabel{}, label_at(w2.samples().front()));
  s.coeffs = Eigen::MatrixXcd(Eigen::Matrix2cd(s.coeffs) * Eigen::Matrix2cd(Vec2c(0.8, 0.6).asDiagonal()));
  s.coeffs /= std::sqrt(bipartite_norm_squared(s));
  const Mat2c P = rest_up(), Q = Mat2c::Identity() - P;
  // project then evolve vs evolve then project
  const SlotProjection a = project_slot(s, 0, P);
  const BipartiteState e = evolve_local(s, 1, w2, no_field(), 0.0, 1e-12);
  const SlotProjection b = project_slot(e, 0, P);
  CHECK(std::abs(a.probability - b.probability) < 1e-12);
  const BipartiteState ae = evolve_local(a.state, 1, w2, no_field(), 0.0, 1e-12);
  CHECK(maxabs(ae.coeffs - b.state.coeffs) < 1e-10);
  // slot 1 marginal with and without a slot 0 measurement
  const Mat2c P2 = spin_projectors(Vec4(0, 1, 0, 0), Vec4(1, 0, 0, 0)).plus;
  auto p_slot1 = [&](const BipartiteState& st) {
    const BipartiteState rest = apply_local(st, 1, spin_half_boost(st.labels[1].u).inverse(), HilbertLabel{st.labels[1].x, Vec4(1, 0, 0, 0)});
    return project_slot(rest, 1, P2).probability;
  };
  const double before = p_slot1(e);
  const SlotProjection pq = project_slot(e, 0, Q);
  const double after = b.probability * p_slot1(b.state) + pq.probability * p_slot1(pq.state);
  CHECK(std::abs(before - after) < 1e-12);
}

TEST_CASE("photon slots stay transverse") {
  const Worldline ray = integrate_null_geodesic(schw(), schw()->event(Vec4(0, 10, kPi / 2, 0)),
                                                Vec4(1.0, -0.6, 0.48, 0.64), 6.0, 1e-12);
  const HilbertLabel at = label_at(ray.samples().front());
  const PhotonState p = from_jones(Vec2c(1, I1) / std::sqrt(2.0), at);
  BipartiteState s = product_state(p, p);
  CHECK(transversality_residual(s) < 1e-14);
  s = evolve_local(s, 0, ray, no_field(), 0.0, 1e-12);
  CHECK(transversality_residual(s) < 1e-10);
  const Mat4c Pr = polarizer_projector(from_jones(Vec2c(1, I1) / std::sqrt(2.0), s.labels[0]).pol);
  const SlotProjection r = project_slot(product_state(p, p), 0, polarizer_projector(p.pol));
  CHECK(r.probability == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(project_slot(s, 0, Pr).probability == doctest::Approx(1.0).epsilon(1e-10));
  const BipartiteState mixed = product_state(p, FermionState{Vec2c(1, 0), HilbertLabel{}});
  CHECK(bipartite_norm_squared(mixed) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("teleportation in flat space") {
  const HilbertLabel at{};
  const std::array<BasisPairField, 3> f{static_basis(at), static_basis(at), static_basis(at)};
  const TeleportResult r = teleport(1.0, 0.0, f, BellOutcome::phi_plus, 0);
  CHECK(r.fidelity == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(maxabs(r.bob_state.psi - f[2].phi) < 1e-15);
  CHECK(r.probability == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("teleportation along schwarzschild legs") {
  const Vec4 x0(0, 8, kPi / 2, 0);
  const Worldline w1 = leg(Vec4(0, 9, kPi / 2, 0.1), Vec3(0.1, -0.2, 0.1), 6.0);
  const Worldline w2 = leg(x0, Vec3(0.3, 0.1, 0.2), 7.0);
  const Worldline w3 = leg(x0, Vec3(-0.2, 0.25, -0.3), 9.0);
  auto rest_pair = [](const Worldline& w, double a) {
    const HilbertLabel at = label_at(w.samples().front());
    const Vec2c p(std::cos(a), std::sin(a) * I1), q(std::sin(a) * I1, std::cos(a));
    return std::pair{from_rest_frame(RestFrameState{p}, at).psi, from_rest_frame(RestFrameState{q}, at).psi};
  };
  auto field = [&](const Worldline& w, double a) {
    const auto [p, q] = rest_pair(w, a);
    return transport_basis(w, no_field(), 0.0, p, q, 1e-12);
  };
  const std::array<BasisPairField, 3> f{field(w1, 0.3), field(w2, 1.1), field(w3, -0.4)};
  std::mt19937_64 rng(77);
  std::normal_distribution<double> d;
  double worst = 0.0;
  for (int n = 0; n < 10; ++n) {
    Vec2c ab(cplx(d(rng), d(rng)), cplx(d(rng), d(rng)));
    ab.normalize();
    for (BellOutcome o : {BellOutcome::phi_plus, BellOutcome::phi_minus, BellOutcome::psi_plus, BellOutcome::psi_minus}) {
      const TeleportResult r = teleport(ab(0), ab(1), f, o, 0);
      worst = std::max(worst, 1.0 - r.fidelity);
      CHECK(r.probability == doctest::Approx(0.25).epsilon(1e-9));
    }
  }
  CHECK(worst < 1e-9);
  // sampled outcomes are reproducible
  CHECK(teleport(0.6, 0.8, f, std::nullopt, 5).outcome == teleport(0.6, 0.8, f, std::nullopt, 5).outcome);
  CHECK_THROWS_AS(teleport(1.0, 1.0, f, std::nullopt, 0), InvalidArgument);
}

TEST_CASE("untransported bob basis gives outcome-dependent states") {
  // tilted tetrad so the Thomas rotation axis has no zero component
  LocalLorentzField tilt;
  tilt.lambda = [](const Vec4&) {
    Mat4 L = Mat4::Identity();
    L.block<3, 3>(1, 1) = Eigen::AngleAxisd(0.7, Vec3(1, 1, 0).normalized()).toRotationMatrix();
    return L;
  };
  auto m = share(apply_local_lorentz(minkowski_model(), tilt));
  const Worldline w3 = circular_orbit(m, 1.0, 0.6, 1.0);
  const Worldline w12 = static_observer(m, m->event(Vec4::Zero()), 1.0, 3);
  auto lifted = [](const Worldline& w) {
    const HilbertLabel at = label_at(w.samples().front());
    return std::pair{from_rest_frame(RestFrameState{Vec2c(1, 0)}, at).psi,
                     from_rest_frame(RestFrameState{Vec2c(0, 1)}, at).psi};
  };
  auto field = [&](const Worldline& w) {
    const auto [p, q] = lifted(w);
    return transport_basis(w, no_field(), 0.0, p, q, 1e-12);
  };
  const std::array<BasisPairField, 3> f{field(w12), field(w12), field(w3)};
  const BasisPairField wrong = static_basis(f[2].end);
  std::vector<FermionState> bob;
  for (BellOutcome o : {BellOutcome::phi_plus, BellOutcome::phi_minus, BellOutcome::psi_plus, BellOutcome::psi_minus}) {
    CHECK(teleport(0.6, cplx(0, 0.8), f, o, 0).fidelity == doctest::Approx(1.0).epsilon(1e-9));
    bob.push_back(teleport(0.6, cplx(0, 0.8), f, o, 0, &wrong).bob_state);
  }
  double closest = 1.0;
  for (std::size_t i = 0; i < bob.size(); ++i)
    for (std::size_t j = i + 1; j < bob.size(); ++j)
      closest = std::min(closest, std::sqrt(std::max(0.0, 1.0 - std::norm(inner_product(bob[i], bob[j])))));
  CHECK(closest > 1e-3);
}

TEST_CASE("degenerate basis fields are rejected") {
  BasisPairField f = static_basis(HilbertLabel{});
  f.psi = f.phi;
  CHECK(orthonormality_residual(f) > 0.5);
  const std::array<BasisPairField, 3> fs{f, f, f};
  CHECK_THROWS_AS(teleport(1.0, 0.0, fs, BellOutcome::phi_plus, 0), DegenerateSetup);
}
