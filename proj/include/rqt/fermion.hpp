#pragma once

#include <vector>

#include "rqt/worldline.hpp"

namespace rqt {

// Event and tetrad velocity that index a qubit Hilbert space.
struct HilbertLabel {
  Event x;
  Vec4 u = Vec4(1, 0, 0, 0);
};

// Labels agree when chart, coordinates and velocity agree to tol (relative to
// the velocity scale for null labels).
bool same_label(const HilbertLabel& a, const HilbertLabel& b, double tol = 1e-9);
void require_same_label(const HilbertLabel& a, const HilbertLabel& b, const char* where);

struct FermionState {
  Vec2c psi = Vec2c(1, 0);
  HilbertLabel at;
};

// components in the comoving orthonormal basis
struct RestFrameState {
  Vec2c psi = Vec2c(1, 0);
};

// <a|b>_u = a^dagger (u_I sbar^I) b
cplx inner_product(const FermionState& a, const FermionState& b);
double norm_squared(const FermionState& s);
FermionState normalized(FermionState s);

RestFrameState to_rest_frame(const FermionState& s);
FermionState from_rest_frame(const RestFrameState& rf, const HilbertLabel& at);

// d psi/d tau = M psi with
// M = (i/2) u^mu omega_mu IJ L^IJ + i u_I a_J L^IJ - i (q/2m) Brest_IJ L^IJ
Mat2c transport_generator(const WorldlineSample& s, const Connection& omega,
                          const Mat4& F, double charge_to_mass);
// Brest = h F h with h^I_J = delta - u^I u_J, returned with both indices down
Mat4 rest_magnetic(const Mat4& F, const Vec4& u);

// rest-frame generator built from the boost-velocity form
Mat2c rest_frame_generator(const WorldlineSample& s, const Connection& omega,
                           const Mat4& F, double charge_to_mass);

struct FermionTransport {
  std::vector<double> param;
  std::vector<FermionState> states;
  double max_norm_drift = 0.0;
  FermionState final_state() const { return states.back(); }
};

struct RestFrameTransport {
  std::vector<double> param;
  std::vector<RestFrameState> states;
  double max_norm_drift = 0.0;
};

FermionTransport transport(const FermionState& state, const Worldline& wl,
                           const EMField& em, double charge_to_mass, double tol);

RestFrameTransport transport_rest_frame(const RestFrameState& rf, const Worldline& wl,
                                        const EMField& em, double charge_to_mass,
                                        double tol);

// Linear map taking the spinor at the start of wl to the spinor at its end.
Mat2c transport_propagator(const Worldline& wl, const EMField& em, double charge_to_mass,
                           double tol);

HilbertLabel label_at(const WorldlineSample& s);

}  // namespace rqt
