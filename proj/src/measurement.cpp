#include "rqt/measurement.hpp"

#include <cmath>
#include <random>

#include "rqt/errors.hpp"
#include "rqt/spin_algebra.hpp"

namespace rqt {

namespace {
const cplx I1(0.0, 1.0);

double uniform01(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

void check_velocity(const Vec4& u, const char* where) {
  if (!(u(0) > 0.0) || std::abs(mdot(u, u) - 1.0) > 1e-9)
    throw DomainError(std::string(where) + ": velocity must be future unit timelike");
}
}  // namespace

SpinObservable spin_observable(const Vec4& N, const Vec4& u) {
  check_velocity(u, "spin_observable");
  SpinObservable o;
  o.N = N;
  o.u = u;
  const Mat4 X = lower(u) * lower(N).transpose();
  o.op = -2.0 * I1 * contract_generator(X) + mdot(u, N) * Mat2c::Identity();
  return o;
}

double hermiticity_residual(const SpinObservable& obs) {
  const Mat2c ua = sigma_bar_dot(obs.u) * obs.op;
  return (ua - ua.adjoint()).cwiseAbs().maxCoeff();
}

SpinProjectorPair spin_projectors(const Vec4& n, const Vec4& u) {
  check_velocity(u, "spin_projectors");
  if (std::abs(mdot(n, n) + 1.0) > 1e-9 || std::abs(mdot(n, u)) > 1e-9)
    throw DomainError("spin_projectors: axis must be unit spacelike and orthogonal to u");
  const Mat2c S = -2.0 * I1 * contract_generator(lower(u) * lower(n).transpose());
  SpinProjectorPair p;
  p.n = n;
  p.u = u;
  p.plus = 0.5 * (Mat2c::Identity() + S);
  p.minus = 0.5 * (Mat2c::Identity() - S);
  return p;
}

Vec4 stern_gerlach_axis(const SternGerlachSetup& s) {
  check_velocity(s.u, "stern_gerlach_axis");
  check_velocity(s.v, "stern_gerlach_axis");
  const Vec4 B = s.m * mdot(s.v, s.u) - s.v * mdot(s.m, s.u);
  const double b2 = -mdot(B, B);
  if (!(b2 > 1e-24)) throw DegenerateSetup("Stern-Gerlach field vanishes in the rest frame");
  return B / std::sqrt(b2);
}

SpinOperator spin_operator(const SternGerlachSetup& setup) {
  const Vec4 n = stern_gerlach_axis(setup);
  return SpinOperator{spin_observable(n, setup.u), spin_projectors(n, setup.u)};
}

double expectation(const FermionState& state, const SpinObservable& obs) {
  if ((state.at.u - obs.u).cwiseAbs().maxCoeff() > 1e-9)
    throw HilbertSpaceMismatch("expectation: observable built for another velocity");
  const double n = norm_squared(state);
  return (state.psi.adjoint() * sigma_bar_dot(obs.N) * state.psi)(0, 0).real() / n;
}

std::pair<double, double> spin_probabilities(const FermionState& state,
                                             const SpinProjectorPair& proj) {
  if ((state.at.u - proj.u).cwiseAbs().maxCoeff() > 1e-9)
    throw HilbertSpaceMismatch("spin_probabilities: projectors built for another velocity");
  const Mat2c U = sigma_bar_dot(state.at.u);
  const double n = norm_squared(state);
  const double pp = (state.psi.adjoint() * U * proj.plus * state.psi)(0, 0).real() / n;
  const double pm = (state.psi.adjoint() * U * proj.minus * state.psi)(0, 0).real() / n;
  return {pp, pm};
}

SpinMeasurement measure_spin(const FermionState& state, const SternGerlachSetup& setup,
                             std::uint64_t seed) {
  const SpinOperator op = spin_operator(setup);
  auto [pp, pm] = spin_probabilities(state, op.projectors);
  SpinMeasurement m;
  m.p_plus = pp;
  m.p_minus = pm;
  m.outcome = uniform01(seed) < pp ? +1 : -1;
  FermionState post = state;
  post.psi = (m.outcome > 0 ? op.projectors.plus : op.projectors.minus) * state.psi;
  m.post = normalized(post);
  return m;
}

Mat4c photon_hermitian(double a, double b, cplx beta, const AdaptationRotation& ad) {
  // f_A^I is the transpose of the diad rows f^A_I
  const Eigen::Matrix<cplx, 4, 1> f1 = ad.diad.row(0).transpose().cast<cplx>();
  const Eigen::Matrix<cplx, 4, 1> f2 = ad.diad.row(1).transpose().cast<cplx>();
  const Eigen::Matrix<cplx, 1, 4> g1 = ad.diad.row(0).cast<cplx>();
  const Eigen::Matrix<cplx, 1, 4> g2 = ad.diad.row(1).cast<cplx>();
  return a * f1 * g1 + beta * f1 * g2 + std::conj(beta) * f2 * g1 + b * f2 * g2;
}

double photon_hermiticity_residual(const Mat4c& A) {
  const Mat4c ea = eta().cast<cplx>() * A;
  return (ea - ea.adjoint()).cwiseAbs().maxCoeff();
}

double photon_gauge_residual(const Mat4c& A, const Vec4& u) {
  return (A * u.cast<cplx>()).cwiseAbs().maxCoeff() / std::abs(u(0));
}

PolarizerVector linear_polarizer(double angle, const Vec4& u) {
  const Diad f = adaptation_rotation(u).diad;
  PolarizerVector p;
  p.u = u;
  p.P = (std::cos(angle) * f.row(0) + std::sin(angle) * f.row(1)).transpose().cast<cplx>();
  return p;
}

PolarizerVector circular_polarizer(int handedness, const Vec4& u) {
  const Diad f = adaptation_rotation(u).diad;
  PolarizerVector p;
  p.u = u;
  const cplx s = handedness >= 0 ? I1 : -I1;
  p.P = (f.row(0).transpose().cast<cplx>() + s * f.row(1).transpose().cast<cplx>()) /
        std::sqrt(2.0);
  return p;
}

double polarizer_probability(const PhotonState& state, const PolarizerVector& P) {
  const Vec3 a = state.at.u.tail<3>() / state.at.u(0), b = P.u.tail<3>() / P.u(0);
  if ((a - b).cwiseAbs().maxCoeff() > 1e-9)
    throw HilbertSpaceMismatch("polarizer built for a different photon direction");
  // |conj(P^I) psi_I|^2 normalised by both gauge-class norms
  const cplx amp = -(P.P.adjoint() * eta().cast<cplx>() * state.pol)(0, 0);
  const double np = -(P.P.adjoint() * eta().cast<cplx>() * P.P)(0, 0).real();
  return std::norm(amp) / (np * photon_norm_squared(state));
}

PolarizationMeasurement measure_polarization(const PhotonState& state,
                                             const PolarizerVector& P, std::uint64_t seed) {
  PolarizationMeasurement m;
  m.p = polarizer_probability(state, P);
  m.transmit = uniform01(seed) < m.p;
  const cplx amp = -(P.P.adjoint() * eta().cast<cplx>() * state.pol)(0, 0);
  const double np = -(P.P.adjoint() * eta().cast<cplx>() * P.P)(0, 0).real();
  PhotonState post = state;
  if (m.transmit) {
    post.pol = P.P * (amp / std::abs(amp)) / std::sqrt(np);
  } else {
    post.pol = state.pol - P.P * amp / np;
    const double n = photon_norm_squared(post);
    if (n > 0.0) post.pol /= std::sqrt(n);
  }
  m.post = canonical(post);
  return m;
}

}  // namespace rqt
