#pragma once

#include <cstdint>

#include "rqt/photon.hpp"

namespace rqt {

struct SpinObservable {
  Vec4 N = Vec4::Zero();
  Vec4 u = Vec4(1, 0, 0, 0);
  Mat2c op = Mat2c::Zero();  // A_A^B
};

// A = -2i u_I N_J L^IJ + (u.N) 1
SpinObservable spin_observable(const Vec4& N, const Vec4& u);
// | U A - (U A)^dagger | with U = u_I sbar^I
double hermiticity_residual(const SpinObservable& obs);

struct SpinProjectorPair {
  Mat2c plus = Mat2c::Zero();
  Mat2c minus = Mat2c::Zero();
  Vec4 n = Vec4::Zero();
  Vec4 u = Vec4(1, 0, 0, 0);
};
// P+- = (1 +- S)/2 with S = -2i u_I n_J L^IJ; requires n.n = -1, n.u = 0
SpinProjectorPair spin_projectors(const Vec4& n, const Vec4& u);

struct SternGerlachSetup {
  Vec4 m = Vec4(0, 0, 0, 1);  // unit spatial orientation of the field gradient
  Vec4 v = Vec4(1, 0, 0, 0);  // apparatus velocity
  Vec4 u = Vec4(1, 0, 0, 0);  // particle velocity
};

// n = B/|B| with B^I = M^I (v.u) - v^I (M.u)
Vec4 stern_gerlach_axis(const SternGerlachSetup& setup);

struct SpinOperator {
  SpinObservable observable;
  SpinProjectorPair projectors;
};
SpinOperator spin_operator(const SternGerlachSetup& setup);

// psibar N_I sbar^I psi for a normalised state
double expectation(const FermionState& state, const SpinObservable& obs);

struct SpinMeasurement {
  int outcome = 0;
  FermionState post;
  double p_plus = 0.0;
  double p_minus = 0.0;
};
SpinMeasurement measure_spin(const FermionState& state, const SternGerlachSetup& setup,
                             std::uint64_t seed);
// probabilities only, no sampling
std::pair<double, double> spin_probabilities(const FermionState& state,
                                             const SpinProjectorPair& proj);

// A = a f1 f^1 + beta f1 f^2 + conj(beta) f2 f^1 + b f2 f^2, acting on psi^I
Mat4c photon_hermitian(double a, double b, cplx beta, const AdaptationRotation& adapt);
// | eta A - (eta A)^dagger |
double photon_hermiticity_residual(const Mat4c& A);
// | A u |
double photon_gauge_residual(const Mat4c& A, const Vec4& u);

struct PolarizerVector {
  Vec4c P = Vec4c::Zero();
  Vec4 u = Vec4::Zero();
};
PolarizerVector linear_polarizer(double angle, const Vec4& u);
// handedness +1 gives (f1 + i f2)/sqrt2
PolarizerVector circular_polarizer(int handedness, const Vec4& u);

double polarizer_probability(const PhotonState& state, const PolarizerVector& P);

struct PolarizationMeasurement {
  bool transmit = false;
  PhotonState post;
  double p = 0.0;
};
PolarizationMeasurement measure_polarization(const PhotonState& state,
                                             const PolarizerVector& P, std::uint64_t seed);

}  // namespace rqt
