#include "rqt/fermion.hpp"

#include <cmath>

#include "rqt/errors.hpp"
#include "rqt/spin_algebra.hpp"

namespace rqt {

namespace {
const cplx I1(0.0, 1.0);

OdeVec<4> pack(const Vec2c& v) {
  return OdeVec<4>(v(0).real(), v(0).imag(), v(1).real(), v(1).imag());
}
Vec2c unpack(const OdeVec<4>& y) { return Vec2c(cplx(y(0), y(1)), cplx(y(2), y(3))); }

OdeVec<4> apply_gen(const Mat2c& m, const OdeVec<4>& y) { return pack(m * unpack(y)); }

Mat4 field_at(const EMField& em, const Event& x) {
  return em.empty() ? Mat4::Zero().eval() : em.F(x);
}

void require_timelike(const Worldline& wl, const char* where) {
  if (wl.kind() != WorldlineKind::timelike)
    throw InvalidArgument(std::string(where) + ": worldline must be timelike");
}
}  // namespace

bool same_label(const HilbertLabel& a, const HilbertLabel& b, double tol) {
  if (!(a.x.chart == b.x.chart)) return false;
  const double xs = std::max(1.0, std::max(a.x.x.cwiseAbs().maxCoeff(), b.x.x.cwiseAbs().maxCoeff()));
  const double us = std::max(1.0, std::max(a.u.cwiseAbs().maxCoeff(), b.u.cwiseAbs().maxCoeff()));
  return (a.x.x - b.x.x).cwiseAbs().maxCoeff() <= tol * xs &&
         (a.u - b.u).cwiseAbs().maxCoeff() <= tol * us;
}

void require_same_label(const HilbertLabel& a, const HilbertLabel& b, const char* where) {
  if (!same_label(a, b))
    throw HilbertSpaceMismatch(std::string(where) +
                               ": states belong to different Hilbert spaces");
}

HilbertLabel label_at(const WorldlineSample& s) { return HilbertLabel{s.x, s.u}; }

cplx inner_product(const FermionState& a, const FermionState& b) {
  require_same_label(a.at, b.at, "inner_product");
  return (a.psi.adjoint() * sigma_bar_dot(a.at.u) * b.psi)(0, 0);
}

double norm_squared(const FermionState& s) {
  return (s.psi.adjoint() * sigma_bar_dot(s.at.u) * s.psi)(0, 0).real();
}

FermionState normalized(FermionState s) {
  double n = norm_squared(s);
  if (!(n > 0.0)) throw DomainError("cannot normalise a zero spinor");
  s.psi /= std::sqrt(n);
  return s;
}

RestFrameState to_rest_frame(const FermionState& s) {
  return RestFrameState{spin_half_boost(s.at.u).inverse() * s.psi};
}

FermionState from_rest_frame(const RestFrameState& rf, const HilbertLabel& at) {
  return FermionState{spin_half_boost(at.u) * rf.psi, at};
}

Mat4 rest_magnetic(const Mat4& F, const Vec4& u) {
  // h_I^K = delta - u_I u^K acting on lower indices
  const Mat4 h = Mat4::Identity() - lower(u) * u.transpose();
  return h * F * h.transpose();
}

Mat2c transport_generator(const WorldlineSample& s, const Connection& omega,
                          const Mat4& F, double qm) {
  Mat4 X = Mat4::Zero();  // u^mu omega_mu IJ + 2 u_I a_J
  for (int m = 0; m < 4; ++m) X += s.dx(m) * lowered(omega[m]);
  X += 2.0 * lower(s.u) * lower(s.a).transpose();
  Mat2c M = 0.5 * I1 * contract_generator(X);
  if (qm != 0.0) M -= 0.5 * I1 * qm * contract_generator(rest_magnetic(F, s.u));
  return M;
}

Mat2c rest_frame_generator(const WorldlineSample& s, const Connection& omega,
                           const Mat4& F, double qm) {
  const Vec4& u = s.u;
  const double gamma = u(0);
  const Vec3 beta = u.tail<3>() / gamma;
  Mat4 W = Mat4::Zero();  // u^mu omega_mu^I_J
  for (int m = 0; m < 4; ++m) W += s.dx(m) * omega[m];
  const Vec4 du = s.a - W * u;
  const Vec3 dbeta = (du.tail<3>() * gamma - u.tail<3>() * du(0)) / (gamma * gamma);
  const Vec3 c = beta.cross(dbeta);
  Mat2c M = Mat2c::Zero();
  const double th = gamma * gamma / (2.0 * (gamma + 1.0));
  for (int k = 1; k <= 3; ++k) M += I1 * th * c(k - 1) * pauli(k);
  const Mat4 wl = eta() * W;  // u^mu omega_mu IJ
  const double g2 = gamma * gamma / (gamma + 1.0);
  Mat4 coef = Mat4::Zero();
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) {
      double wb = 0.0;
      for (int l = 1; l <= 3; ++l) wb += wl(i, l) * beta(l - 1);
      coef(i, j) = 0.5 * wl(i, j) + gamma * wl(0, j) * beta(i - 1) + g2 * wb * beta(j - 1);
    }
  M += I1 * contract_generator(coef);
  if (qm != 0.0) {
    const Mat4 L = vector_boost(u);
    const Mat4 Bt = L.transpose() * rest_magnetic(F, u) * L;
    M -= 0.5 * I1 * qm * contract_generator(Bt);
  }
  return M;
}

FermionTransport transport(const FermionState& state, const Worldline& wl,
                           const EMField& em, double qm, double tol) {
  require_timelike(wl, "transport");
  const WorldlineSample s0 = wl.samples().front();
  require_same_label(state.at, label_at(s0), "transport");
  const SpacetimeModel& model = wl.model();
  auto rhs = [&](double p, const OdeVec<4>& y) {
    const WorldlineSample s = wl.at(p);
    return apply_gen(transport_generator(s, model.connection(s.x), field_at(em, s.x), qm), y);
  };
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  auto tr = dopri5<4>(rhs, wl.begin(), pack(state.psi), wl.end(), opt, wl.params());
  FermionTransport out;
  const double n0 = norm_squared(state);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const WorldlineSample s = wl.at(tr.t[i]);
    FermionState st{unpack(tr.y[i]), label_at(s)};
    out.param.push_back(tr.t[i]);
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(norm_squared(st) - n0) / n0);
    out.states.push_back(st);
  }
  return out;
}

RestFrameTransport transport_rest_frame(const RestFrameState& rf, const Worldline& wl,
                                        const EMField& em, double qm, double tol) {
  require_timelike(wl, "transport_rest_frame");
  const SpacetimeModel& model = wl.model();
  auto rhs = [&](double p, const OdeVec<4>& y) {
    const WorldlineSample s = wl.at(p);
    return apply_gen(rest_frame_generator(s, model.connection(s.x), field_at(em, s.x), qm), y);
  };
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  auto tr = dopri5<4>(rhs, wl.begin(), pack(rf.psi), wl.end(), opt, wl.params());
  RestFrameTransport out;
  const double n0 = rf.psi.squaredNorm();
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    RestFrameState st{unpack(tr.y[i])};
    out.param.push_back(tr.t[i]);
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(st.psi.squaredNorm() - n0) / n0);
    out.states.push_back(st);
  }
  return out;
}

Mat2c transport_propagator(const Worldline& wl, const EMField& em, double qm, double tol) {
  const HilbertLabel at = label_at(wl.samples().front());
  Mat2c K;
  for (int c = 0; c < 2; ++c) {
    FermionState s{Vec2c::Unit(c), at};
    K.col(c) = transport(s, wl, em, qm, tol).final_state().psi;
  }
  return K;
}

}  // namespace rqt
