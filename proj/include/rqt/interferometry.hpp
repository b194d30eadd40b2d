#pragma once

#include <cmath>
#include <string>

#include "rqt/errors.hpp"
#include "rqt/photon.hpp"

namespace rqt {

enum class ParticleKind { fermion, photon };

struct Particle {
  ParticleKind kind = ParticleKind::fermion;
  double mass = 1.0;    // natural units (inverse length)
  double charge = 0.0;  // units of e
};

struct PhaseLedger {
  double theta_int = 0.0;
  int arm_id = 0;
  ParticleKind kind = ParticleKind::fermion;
  double charge = 0.0;
  double end_param = 0.0;
  Event endpoint;
  Vec4 k_lower = Vec4::Zero();  // coordinate components k_mu at the endpoint
  Vec4 A_lower = Vec4::Zero();  // A_mu at the endpoint
};

// Internal phase integral of (k + eA) along the arm up to end_param
// (defaults to the end of the worldline). Photon arms give exactly 0.
PhaseLedger arm_phase(const Worldline& wl, const EMField& em, const Particle& p,
                      int arm_id = 0, double end_param = NAN, double tol = 1e-12);

enum class WavevectorPolicy { strict, relaxed };

// (k + eA).(x1 - x2) + (theta2 - theta1)
double phase_difference(const PhaseLedger& arm1, const PhaseLedger& arm2,
                        const Vec4& k_common, const Vec4& A_at_detector,
                        WavevectorPolicy policy = WavevectorPolicy::strict);

struct PhaseDecomposition {
  double internal = 0.0;      // theta2 - theta1
  double displacement = 0.0;  // (k + eA).(x1 - x2)
};
PhaseDecomposition decompose_phase(const PhaseLedger& arm1, const PhaseLedger& arm2,
                                   const Vec4& k_common, const Vec4& A_at_detector);

// e times the closed line integral of A: arm 2 out, straight chart segment
// from x2 to x1, arm 1 back
double aharonov_bohm_phase(const Worldline& arm1, const Worldline& arm2,
                           const EMField& em, double charge, double tol = 1e-12);

// arg <psi1|psi2> in (-pi, pi]
double transport_phase(const FermionState& a, const FermionState& b);
double transport_phase(const PhotonState& a, const PhotonState& b);

// Beam-splitter convention: each arm state is normalised on its own and
// carries the 1/sqrt2 of the first splitter; the second splitter contributes
// a and b.
struct FermionRecombination {
  FermionState state;  // a psi1 + b psi2 e^{i dtheta}, unnormalised
  double probability = 0.0;
};
struct PhotonRecombination {
  PhotonState state;
  double probability = 0.0;
};
FermionRecombination recombine(const FermionState& s1, const FermionState& s2, cplx a,
                               cplx b, double delta_theta);
PhotonRecombination recombine(const PhotonState& s1, const PhotonState& s2, cplx a,
                              cplx b, double delta_theta);

struct InterferometerResult {
  double delta_theta = 0.0;
  double delta_theta_trans = 0.0;
  double delta_theta_tot = 0.0;
  double probability = 0.0;
  FermionState recombined;
  cplx a{0.0, 1.0 / 1.4142135623730951};
  cplx b{0.0, 1.0 / 1.4142135623730951};
};

// Convenience: full recipe for two fermion arms ending in the same Hilbert space.
InterferometerResult interfere(const PhaseLedger& arm1, const PhaseLedger& arm2,
                               const FermionState& s1, const FermionState& s2,
                               const Vec4& k_common, const Vec4& A_at_detector);

enum class CowMode { exact, weak_field, nonrel, nonrel_g2, standard };
CowMode parse_cow_mode(const std::string& s);
std::string to_string(CowMode m);

// Phase of the Rindler neutron interferometer. m, v1, dz, ell, g in natural units.
template <class Real>
Real cow_phase(const Real& m, const Real& v1, const Real& dz, const Real& ell,
               const Real& g, CowMode mode) {
  using std::sqrt;
  if (!(v1 > 0) || !(v1 < 1) || dz < 0 || !(ell > 0) || !(g > 0))
    throw DomainError("cow_phase: need 0 < v1 < 1, dz >= 0, ell > 0, g > 0");
  const Real x = dz * g / (v1 * v1);
  const Real gamma1 = 1 / sqrt(1 - v1 * v1);
  switch (mode) {
    case CowMode::exact: {
      // m ell gamma1 (v1 - v2/g00) = m ell gamma1 (g00 - 1)/(g00 v1 + v2)
      const Real eps = dz * g;
      const Real gm1 = eps * (2 + eps);
      const Real g00 = 1 + gm1;
      const Real v2sq = g00 * (v1 * v1 - gm1 * (1 - v1 * v1));
      if (!(v2sq > 0)) throw ComplexVelocity("cow_phase: particle cannot reach height dz");
      const Real v2 = sqrt(v2sq);
      return m * ell * gamma1 * gm1 / (g00 * v1 + v2);
    }
    case CowMode::weak_field:
    case CowMode::nonrel: {
      if (!(1 - 2 * x > 0)) throw ComplexVelocity("cow_phase: particle cannot reach height dz");
      // 1 - sqrt(1 - 2x) = 2x / (1 + sqrt(1 - 2x))
      const Real s = 2 * x / (1 + sqrt(1 - 2 * x));
      return mode == CowMode::weak_field ? m * ell * v1 * gamma1 * s : m * ell * v1 * s;
    }
    case CowMode::nonrel_g2:
      return m * ell * (dz * g / v1 + dz * dz * g * g / (2 * v1 * v1 * v1));
    case CowMode::standard:
      return m * dz * ell * g / v1;
  }
  throw InvalidArgument("cow_phase: unknown mode");
}

// Same quantity from the worldline recipe: two horizontal legs in Rindler at
// heights 0 and dz with speeds from energy conservation, internal phases by
// quadrature, displacement phase from the arrival-time difference.
struct CowWorldlineResult {
  double delta_theta = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
  double displacement = 0.0;
  double v2 = 0.0;
};
CowWorldlineResult cow_phase_worldlines(double m, double v1, double dz, double ell, double g,
                                        double tol = 1e-13);

}  // namespace rqt
