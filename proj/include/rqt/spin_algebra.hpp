#pragma once

// SL(2,C) kernel. Index layout of every 2x2 matrix is noted at its accessor.
// Spinors psi_A carry a lower unprimed index and are stored as columns.

#include <optional>
#include <random>
#include <utility>

#include "rqt/types.hpp"

namespace rqt {

// sigma^I_{AA'}: row A, column A'. (1, sigma_x, sigma_y, sigma_z)
const Mat2c& sigma(int I);
// sigma-bar^{I A'A}: row A', column A. (1, -sigma_x, -sigma_y, -sigma_z)
const Mat2c& sigma_bar(int I);
// L^{IJ}_A^B: row A, column B. (i/4)(sigma^I sigma-bar^J - sigma^J sigma-bar^I)
const Mat2c& generator(int I, int J);
// Ordinary Pauli matrices (k = 1..3), for rest-frame algebra.
const Mat2c& pauli(int k);

// X_IJ L^IJ for a tensor given with both indices down
Mat2c contract_generator(const Mat4& x_lower);
// u_I sigma-bar^I for u given with upper index
Mat2c sigma_bar_dot(const Vec4& u_upper);

// epsilon^{AB} with eps^{12} = 1 and eps_{AB} with eps_{12} = 1; raising uses
// the first index: psi^A = eps^{AB} psi_B, lowering psi_A = psi^B eps_{BA}
Mat2c epsilon_upper();
Mat2c epsilon_lower();
Eigen::Vector2cd raise_index(const Vec2c& psi_lower);
Vec2c lower_index(const Eigen::Vector2cd& psi_upper);

// Levi-Civita with eps_{0123} = +1
double levi_civita_lower(int a, int b, int c, int d);
double levi_civita_upper(int a, int b, int c, int d);

struct SpinHalfBoost {
  Mat2c matrix = Mat2c::Identity();
  Vec3 beta = Vec3::Zero();
  double gamma = 1.0;
};

struct LocalLorentz {
  Mat4 lambda = Mat4::Identity();
  std::optional<Mat2c> spin_half;
};

// Pure boost taking (1,0,0,0) to the timelike unit vector u (tetrad components).
Mat2c spin_half_boost(const Vec4& u);
Mat4 vector_boost(const Vec4& u);
std::pair<SpinHalfBoost, LocalLorentz> boost_pair_from_velocity(const Vec4& u);

// Spinor image S of a proper orthochronous Lorentz matrix, fixed up to sign by
// S^dagger sigma-bar^I S = Lambda^I_J sigma-bar^J.
Mat2c spin_half_of(const Mat4& lambda);
// exp of the algebra element with lower-index parameters omega_IJ:
// Lambda = exp(eta omega), S = exp(-(i/2) omega_IJ L^IJ)
std::pair<Mat4, Mat2c> lorentz_exp(const Mat4& omega_lower);

// Random proper Lorentz pair with rapidity and angle parameters bounded by `scale`.
std::pair<Mat4, Mat2c> random_lorentz(std::mt19937_64& rng, double scale);

Mat2c expm2(const Mat2c& a);

// b^I = psibar_{A'} sigma-bar^{I A'A} psi_A
Vec4 bloch_vector(const Vec2c& psi);

struct IdentityReport {
  double sigma_triple = 0.0;       // sbar sigma sbar expansion
  double sigma_bar_generator = 0.0;  // sbar^K L^IJ expansion
  double commutator = 0.0;         // sbar^K L^IJ - (L^IJ)^dagger sbar^K
  double lorentz_algebra = 0.0;    // [L^IJ, L^KL]
  double max() const;
};
IdentityReport sigma_identity_check();

}  // namespace rqt
