#pragma once

#include <vector>

#include "rqt/fermion.hpp"

namespace rqt {

struct PhotonState {
  Vec4c pol = Vec4c::Zero();  // psi^I, tetrad components
  HilbertLabel at;           // at.u is the null tetrad velocity
};

using Diad = Eigen::Matrix<double, 2, 4>;  // f^A_I

struct AdaptationRotation {
  Mat4 R = Mat4::Identity();
  Diad diad = Diad::Zero();
};

// Angular tolerance for the antiparallel case.
constexpr double kAdaptationTol = 1e-8;

// Rotation taking the spatial direction of u onto the tetrad z axis; throws
// AdaptationSingular when u points along -z.
AdaptationRotation adaptation_rotation(const Vec4& u);

// representative with psi^0 = 0 (diad span)
Vec4c canonical_gauge(const Vec4c& psi, const Vec4& u);
PhotonState canonical(PhotonState s);

// -eta_IJ conj(a^I) b^J; labels must agree
cplx photon_inner_product(const PhotonState& a, const PhotonState& b);
double photon_norm_squared(const PhotonState& s);
double transversality(const PhotonState& s);  // |u_I psi^I|

Vec2c jones_vector(const PhotonState& s);
PhotonState from_jones(const Vec2c& jones, const HilbertLabel& at);
// weight of the (1, i)/sqrt2 component of the normalised Jones vector
double helicity_plus(const Vec2c& jones);

// exp(i theta sigma_y)
Eigen::Matrix2d jones_rotation(double theta);

struct PhotonTransport {
  std::vector<double> param;
  std::vector<PhotonState> states;
  double max_norm_drift = 0.0;
  double max_transversality = 0.0;
  PhotonState final_state() const { return states.back(); }
};

PhotonTransport transport_photon(const PhotonState& state, const Worldline& wl, double tol);
Mat4c photon_propagator(const Worldline& wl, double tol);

// rate d(theta)/d(lambda) of the Jones-vector rotation, computed from the
// adaptation rotation R(u) and the connection along the ray
double wigner_rate(const Worldline& wl, double lambda);

struct WignerAngle {
  std::vector<double> param;
  std::vector<double> angle;
};
WignerAngle wigner_rotation(const Worldline& wl, double tol);

// Wigner rotation induced on Jones vectors by a local Lorentz transformation
// Lambda acting at a photon with velocity u: f(Lambda u) Lambda f(u)^-1.
Eigen::Matrix2d lorentz_wigner(const Mat4& lambda, const Vec4& u);

}  // namespace rqt
