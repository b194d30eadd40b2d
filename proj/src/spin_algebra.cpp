#include "rqt/spin_algebra.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

#include "rqt/errors.hpp"
#include "rqt/geometry.hpp"

namespace rqt {

namespace {

const cplx I1(0.0, 1.0);

struct Tables {
  std::array<Mat2c, 4> s, sb, p;
  std::array<std::array<Mat2c, 4>, 4> L;
  Tables() {
    Mat2c id = Mat2c::Identity();
    Mat2c sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << 0, -I1, I1, 0;
    sz << 1, 0, 0, -1;
    s = {id, sx, sy, sz};
    sb = {id, -sx, -sy, -sz};
    p = {id, sx, sy, sz};
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        L[a][b] = 0.25 * I1 * (s[a] * sb[b] - s[b] * sb[a]);
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

int perm_sign(int a, int b, int c, int d) {
  int v[4] = {a, b, c, d};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (v[i] == v[j]) return 0;
  int sgn = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (v[i] > v[j]) sgn = -sgn;
  return sgn;
}

double eta_d(int a) { return a == 0 ? 1.0 : -1.0; }

}  // namespace

const Mat2c& sigma(int I) { return tables().s.at(I); }
const Mat2c& sigma_bar(int I) { return tables().sb.at(I); }
const Mat2c& generator(int I, int J) { return tables().L.at(I).at(J); }
const Mat2c& pauli(int k) { return tables().p.at(k); }

Mat2c contract_generator(const Mat4& x) {
  Mat2c acc = Mat2c::Zero();
  for (int I = 0; I < 4; ++I)
    for (int J = I + 1; J < 4; ++J) acc += (x(I, J) - x(J, I)) * generator(I, J);
  return acc;
}

Mat2c sigma_bar_dot(const Vec4& u) {
  // u_I sbar^I = u^0 + u.sigma
  Mat2c m;
  m << cplx(u(0) + u(3), 0), cplx(u(1), -u(2)), cplx(u(1), u(2)), cplx(u(0) - u(3), 0);
  return m;
}

Mat2c epsilon_upper() {
  Mat2c e;
  e << 0, 1, -1, 0;
  return e;
}
Mat2c epsilon_lower() {
  Mat2c e;
  e << 0, 1, -1, 0;
  return e;
}
Eigen::Vector2cd raise_index(const Vec2c& psi) { return epsilon_upper() * psi; }
Vec2c lower_index(const Eigen::Vector2cd& psi_up) {
  return epsilon_lower().transpose() * psi_up;
}

double levi_civita_lower(int a, int b, int c, int d) { return perm_sign(a, b, c, d); }
double levi_civita_upper(int a, int b, int c, int d) {
  return -static_cast<double>(perm_sign(a, b, c, d));
}

Mat2c spin_half_boost(const Vec4& u) {
  if (!(u(0) > 0.0) || std::abs(mdot(u, u) - 1.0) > 1e-9)
    throw DomainError("spin_half_boost: velocity is not future timelike unit");
  const double gamma = u(0);
  const Vec3 beta = u.tail<3>() / gamma;
  const double b2 = beta.squaredNorm();
  Mat2c m = std::sqrt((gamma + 1.0) / 2.0) * Mat2c::Identity();
  if (b2 > 0.0) {
    // sqrt((g-1)/(2 b^2)) written without cancellation: (g-1) = g^2 b^2/(g+1)
    double c = gamma / std::sqrt(2.0 * (gamma + 1.0));
    for (int k = 1; k <= 3; ++k) m -= c * beta(k - 1) * pauli(k);
  }
  return m;
}

Mat4 vector_boost(const Vec4& u) {
  if (!(u(0) > 0.0) || std::abs(mdot(u, u) - 1.0) > 1e-9)
    throw DomainError("vector_boost: velocity is not future timelike unit");
  const double gamma = u(0);
  const Vec3 gb = u.tail<3>();  // gamma * beta
  Mat4 m = Mat4::Identity();
  m(0, 0) = gamma;
  m.block<1, 3>(0, 1) = gb.transpose();
  m.block<3, 1>(1, 0) = gb;
  m.block<3, 3>(1, 1) += gb * gb.transpose() / (gamma + 1.0);
  return m;
}

std::pair<SpinHalfBoost, LocalLorentz> boost_pair_from_velocity(const Vec4& u) {
  SpinHalfBoost h;
  h.matrix = spin_half_boost(u);
  h.gamma = u(0);
  h.beta = u.tail<3>() / u(0);
  LocalLorentz l;
  l.lambda = vector_boost(u);
  l.spin_half = h.matrix;
  return {h, l};
}

Mat2c expm2(const Mat2c& a) {
  // exp(a) = e^{tr/2} (cosh s + sinh(s)/s (a - tr/2)), s^2 = -det(a - tr/2)
  cplx half = 0.5 * a.trace();
  Mat2c b = a - half * Mat2c::Identity();
  cplx s = std::sqrt(-b.determinant());
  cplx sh = std::abs(s) < 1e-8 ? 1.0 + s * s / 6.0 : std::sinh(s) / s;
  return std::exp(half) * (std::cosh(s) * Mat2c::Identity() + sh * b);
}

std::pair<Mat4, Mat2c> lorentz_exp(const Mat4& omega_lower) {
  Mat4 om = 0.5 * (omega_lower - omega_lower.transpose());
  Mat4 gen = eta() * om;
  Mat4 lam = gen.exp();
  Mat2c s = expm2(-0.5 * I1 * contract_generator(om));
  return {lam, s};
}

Mat2c spin_half_of(const Mat4& lambda) {
  if (!is_proper_lorentz(lambda, 1e-9))
    throw InvalidArgument("spin_half_of: not a proper orthochronous Lorentz matrix");
  Vec4 u = lambda.col(0);
  u /= std::sqrt(mdot(u, u));
  Mat4 rot = lorentz_inverse(vector_boost(u)) * lambda;
  Eigen::Matrix3d r3 = rot.block<3, 3>(1, 1);
  // re-orthogonalise against rounding before extracting the axis
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r3, Eigen::ComputeFullU | Eigen::ComputeFullV);
  r3 = svd.matrixU() * svd.matrixV().transpose();
  Eigen::AngleAxisd aa(r3);
  Mat2c sr = Mat2c::Identity() * std::cos(aa.angle() / 2);
  for (int k = 1; k <= 3; ++k)
    sr -= I1 * std::sin(aa.angle() / 2) * aa.axis()(k - 1) * pauli(k);
  return spin_half_boost(u) * sr;
}

std::pair<Mat4, Mat2c> random_lorentz(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> d(-scale, scale);
  Mat4 om = Mat4::Zero();
  for (int I = 0; I < 4; ++I)
    for (int J = I + 1; J < 4; ++J) {
      om(I, J) = d(rng);
      om(J, I) = -om(I, J);
    }
  return lorentz_exp(om);
}

Vec4 bloch_vector(const Vec2c& psi) {
  Vec4 b;
  for (int I = 0; I < 4; ++I) b(I) = (psi.adjoint() * sigma_bar(I) * psi)(0, 0).real();
  return b;
}

double IdentityReport::max() const {
  return std::max({sigma_triple, sigma_bar_generator, commutator, lorentz_algebra});
}

IdentityReport sigma_identity_check() {
  IdentityReport r;
  auto up = [](int a, int b) { return a == b ? eta_d(a) : 0.0; };
  // sbar^a sigma^m sbar^b = g^am sbar^b - g^ab sbar^m + g^bm sbar^a
  //                        + i eps^{a m b g} sbar_g
  for (int a = 0; a < 4; ++a)
    for (int m = 0; m < 4; ++m)
      for (int b = 0; b < 4; ++b) {
        Mat2c lhs = sigma_bar(a) * sigma(m) * sigma_bar(b);
        Mat2c rhs = up(a, m) * sigma_bar(b) - up(a, b) * sigma_bar(m) +
                    up(b, m) * sigma_bar(a);
        for (int g = 0; g < 4; ++g)
          rhs += I1 * levi_civita_upper(a, m, b, g) * eta_d(g) * sigma_bar(g);
        r.sigma_triple = std::max(r.sigma_triple, (lhs - rhs).cwiseAbs().maxCoeff());
      }
  // sbar^K L^IJ = (i/2)(eta^KI sbar^J - eta^KJ sbar^I + i eps^{KIJ}_L sbar^L)
  for (int K = 0; K < 4; ++K)
    for (int I = 0; I < 4; ++I)
      for (int J = 0; J < 4; ++J) {
        Mat2c lhs = sigma_bar(K) * generator(I, J);
        Mat2c rhs = up(K, I) * sigma_bar(J) - up(K, J) * sigma_bar(I);
        for (int L = 0; L < 4; ++L)
          rhs += I1 * levi_civita_upper(K, I, J, L) * eta_d(L) * sigma_bar(L);
        rhs *= 0.5 * I1;
        r.sigma_bar_generator =
            std::max(r.sigma_bar_generator, (lhs - rhs).cwiseAbs().maxCoeff());
        // sbar^K L^IJ - (L^IJ)^dagger sbar^K = i(eta^KI sbar^J - eta^KJ sbar^I)
        Mat2c c = lhs - generator(I, J).adjoint() * sigma_bar(K);
        Mat2c cr = I1 * (up(K, I) * sigma_bar(J) - up(K, J) * sigma_bar(I));
        r.commutator = std::max(r.commutator, (c - cr).cwiseAbs().maxCoeff());
      }
  // [L^IJ, L^KL] = i(eta^JK L^IL - eta^IK L^JL - eta^JL L^IK + eta^IL L^JK)
  for (int I = 0; I < 4; ++I)
    for (int J = 0; J < 4; ++J)
      for (int K = 0; K < 4; ++K)
        for (int L = 0; L < 4; ++L) {
          Mat2c lhs = generator(I, J) * generator(K, L) - generator(K, L) * generator(I, J);
          Mat2c rhs = I1 * (up(J, K) * generator(I, L) - up(I, K) * generator(J, L) -
                            up(J, L) * generator(I, K) + up(I, L) * generator(J, K));
          r.lorentz_algebra = std::max(r.lorentz_algebra, (lhs - rhs).cwiseAbs().maxCoeff());
        }
  return r;
}

}  // namespace rqt
