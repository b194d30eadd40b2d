#include "rqt/interferometry.hpp"

#include <cmath>
#include <memory>

namespace rqt {

namespace {

double line_integral(const std::function<double(double)>& f, double a, double b, double tol,
                     const std::vector<double>& stops = {}) {
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-3;
  auto rhs = [&](double p, const OdeVec<1>&) { return OdeVec<1>(f(p)); };
  return dopri5<1>(rhs, a, OdeVec<1>(0.0), b, opt, stops).y.back()(0);
}

double A_dot(const EMField& em, const WorldlineSample& s) {
  if (!em.A) return 0.0;
  return em.A(s.x).dot(s.dx);
}

}  // namespace

PhaseLedger arm_phase(const Worldline& wl, const EMField& em, const Particle& p, int arm_id,
                      double end_param, double tol) {
  const double pe = std::isnan(end_param) ? wl.end() : end_param;
  if (pe < wl.begin() || pe > wl.end())
    throw DomainError("arm_phase: end parameter outside the worldline");
  PhaseLedger led;
  led.arm_id = arm_id;
  led.kind = p.kind;
  led.charge = p.kind == ParticleKind::photon ? 0.0 : p.charge;
  led.end_param = pe;
  const WorldlineSample se = wl.at(pe);
  led.endpoint = se.x;
  if (em.A) led.A_lower = em.A(se.x);
  const Mat4 C = wl.model().co_tetrad(se.x);
  if (p.kind == ParticleKind::photon) {
    if (wl.kind() != WorldlineKind::null)
      throw InvalidArgument("arm_phase: photon arm needs a null worldline");
    led.theta_int = 0.0;
    led.k_lower = C.transpose() * (eta() * se.u);
    return led;
  }
  if (wl.kind() != WorldlineKind::timelike)
    throw InvalidArgument("arm_phase: fermion arm needs a timelike worldline");
  const double un = std::sqrt(mdot(se.u, se.u));
  led.k_lower = p.mass * C.transpose() * (eta() * se.u) / un;
  std::vector<double> stops;
  for (double q : wl.params())
    if (q <= pe) stops.push_back(q);
  // k_mu dx^mu = m |dx| is independent of the parametrisation
  auto f = [&](double q) {
    const WorldlineSample s = wl.at(q);
    return p.mass * std::sqrt(std::max(0.0, mdot(s.u, s.u))) + led.charge * A_dot(em, s);
  };
  led.theta_int = pe > wl.begin() ? line_integral(f, wl.begin(), pe, tol, stops) : 0.0;
  return led;
}

namespace {
void check_wavevector(const PhaseLedger& arm, const Vec4& k) {
  const double scale = std::max(1e-300, k.cwiseAbs().maxCoeff());
  if ((arm.k_lower - k).cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw WavevectorMismatch("arm " + std::to_string(arm.arm_id) +
                             " ends with a different wavevector");
}
}  // namespace

PhaseDecomposition decompose_phase(const PhaseLedger& arm1, const PhaseLedger& arm2,
                                   const Vec4& k_common, const Vec4& A_at_detector) {
  if (!(arm1.endpoint.chart == arm2.endpoint.chart))
    throw DomainError("phase_difference: endpoints in different charts");
  PhaseDecomposition d;
  d.internal = arm2.theta_int - arm1.theta_int;
  const Vec4 kA = k_common + arm1.charge * A_at_detector;
  d.displacement = kA.dot(arm1.endpoint.x - arm2.endpoint.x);
  return d;
}

double phase_difference(const PhaseLedger& arm1, const PhaseLedger& arm2,
                        const Vec4& k_common, const Vec4& A_at_detector,
                        WavevectorPolicy policy) {
  if (policy == WavevectorPolicy::strict) {
    check_wavevector(arm1, k_common);
    check_wavevector(arm2, k_common);
  }
  const PhaseDecomposition d = decompose_phase(arm1, arm2, k_common, A_at_detector);
  return d.displacement + d.internal;
}

double aharonov_bohm_phase(const Worldline& arm1, const Worldline& arm2, const EMField& em,
                           double charge, double tol) {
  if (!em.A) return 0.0;
  auto along = [&](const Worldline& wl) {
    return line_integral([&](double q) { return A_dot(em, wl.at(q)); }, wl.begin(), wl.end(),
                         tol, wl.params());
  };
  const Event x1 = arm1.samples().back().x, x2 = arm2.samples().back().x;
  const Vec4 d = x1.x - x2.x;
  const double closing = line_integral(
      [&](double t) { return em.A(Event{x2.x + t * d, x2.chart}).dot(d); }, 0.0, 1.0, tol);
  return charge * (along(arm2) + closing - along(arm1));
}

double transport_phase(const FermionState& a, const FermionState& b) {
  const cplx z = inner_product(a, b);
  if (std::abs(z) <= 1e-12 * std::sqrt(norm_squared(a) * norm_squared(b)))
    throw OrthogonalStates("transport_phase: arm states are orthogonal");
  return std::arg(z);
}

double transport_phase(const PhotonState& a, const PhotonState& b) {
  const cplx z = photon_inner_product(a, b);
  if (std::abs(z) <= 1e-12 * std::sqrt(photon_norm_squared(a) * photon_norm_squared(b)))
    throw OrthogonalStates("transport_phase: arm states are orthogonal");
  return std::arg(z);
}

FermionRecombination recombine(const FermionState& s1, const FermionState& s2, cplx a,
                               cplx b, double delta_theta) {
  require_same_label(s1.at, s2.at, "recombine");
  const FermionState n1 = normalized(s1), n2 = normalized(s2);
  FermionRecombination r;
  r.state.at = s1.at;
  r.state.psi = a * n1.psi + b * std::polar(1.0, delta_theta) * n2.psi;
  r.probability = 0.5 * norm_squared(r.state);
  return r;
}

PhotonRecombination recombine(const PhotonState& s1, const PhotonState& s2, cplx a, cplx b,
                              double delta_theta) {
  photon_inner_product(s1, s2);  // label check
  PhotonRecombination r;
  r.state.at = s1.at;
  r.state.pol = a * s1.pol / std::sqrt(photon_norm_squared(s1)) +
                b * std::polar(1.0, delta_theta) * s2.pol / std::sqrt(photon_norm_squared(s2));
  r.probability = 0.5 * photon_norm_squared(r.state);
  return r;
}

InterferometerResult interfere(const PhaseLedger& arm1, const PhaseLedger& arm2,
                               const FermionState& s1, const FermionState& s2,
                               const Vec4& k_common, const Vec4& A_at_detector) {
  InterferometerResult r;
  r.delta_theta = phase_difference(arm1, arm2, k_common, A_at_detector);
  r.delta_theta_trans = transport_phase(s1, s2);
  r.delta_theta_tot = r.delta_theta + r.delta_theta_trans;
  const FermionRecombination rc = recombine(s1, s2, r.a, r.b, r.delta_theta);
  r.recombined = rc.state;
  r.probability = rc.probability;
  return r;
}

CowMode parse_cow_mode(const std::string& s) {
  if (s == "exact") return CowMode::exact;
  if (s == "weak_field") return CowMode::weak_field;
  if (s == "nonrel") return CowMode::nonrel;
  if (s == "nonrel_g2") return CowMode::nonrel_g2;
  if (s == "standard") return CowMode::standard;
  throw InvalidArgument("unknown COW mode '" + s + "'");
}

std::string to_string(CowMode m) {
  switch (m) {
    case CowMode::exact: return "exact";
    case CowMode::weak_field: return "weak_field";
    case CowMode::nonrel: return "nonrel";
    case CowMode::nonrel_g2: return "nonrel_g2";
    case CowMode::standard: return "standard";
  }
  return "?";
}

CowWorldlineResult cow_phase_worldlines(double m, double v1, double dz, double ell, double g,
                                        double tol) {
  if (!(v1 > 0.0 && v1 < 1.0) || !(ell > 0.0) || !(g > 0.0) || dz < 0.0)
    throw DomainError("cow_phase_worldlines: need 0 < v1 < 1, dz >= 0, ell > 0, g > 0");
  auto model = std::make_shared<const SpacetimeModel>(rindler_model(g));
  const double v2 = rindler_speed_at_height(v1, g, dz);
  const double g00 = (1.0 + g * dz) * (1.0 + g * dz);

  // horizontal legs, proper-time parametrised, both leaving at t = 0
  auto leg = [&](double v, double z, double lapse2) {
    const double a = 1.0 / std::sqrt(lapse2 - v * v);  // dt/dtau
    CoordinatePath path;
    path.x = [=](double tau) { return Vec4(a * tau, a * v * tau, 0.0, z); };
    path.dx = [=](double) { return Vec4(a, a * v, 0.0, 0.0); };
    path.ddx = [](double) { return Vec4::Zero().eval(); };
    const double tau_end = ell / (a * v);
    return worldline_from_path(model, WorldlineKind::timelike, path, 0.0, tau_end, 33);
  };
  const Worldline w1 = leg(v1, 0.0, 1.0);
  const Worldline w2 = leg(v2, dz, g00);
  const Particle p{ParticleKind::fermion, m, 0.0};
  const PhaseLedger a1 = arm_phase(w1, no_field(), p, 1, NAN, tol);
  const PhaseLedger a2 = arm_phase(w2, no_field(), p, 2, NAN, tol);
  // the legs share k_0 but not k_x; the displacement is purely temporal
  // along x, so the endpoint data of arm 1 is used
  const PhaseDecomposition d = decompose_phase(a1, a2, a1.k_lower, Vec4::Zero());
  CowWorldlineResult r;
  r.theta1 = a1.theta_int;
  r.theta2 = a2.theta_int;
  r.displacement = d.displacement;
  r.delta_theta = d.displacement + d.internal;
  r.v2 = v2;
  return r;
}

}  // namespace rqt
