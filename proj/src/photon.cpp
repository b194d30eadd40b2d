#include "rqt/photon.hpp"

#include <cmath>

#include "rqt/errors.hpp"

namespace rqt {

namespace {

OdeVec<8> pack(const Vec4c& v) {
  OdeVec<8> y;
  for (int i = 0; i < 4; ++i) {
    y(2 * i) = v(i).real();
    y(2 * i + 1) = v(i).imag();
  }
  return y;
}
Vec4c unpack(const OdeVec<8>& y) {
  Vec4c v;
  for (int i = 0; i < 4; ++i) v(i) = cplx(y(2 * i), y(2 * i + 1));
  return v;
}

void require_null(const Worldline& wl, const char* where) {
  if (wl.kind() != WorldlineKind::null)
    throw InvalidArgument(std::string(where) + ": worldline must be null");
}

Mat4 velocity_connection(const WorldlineSample& s, const Connection& w) {
  Mat4 W = Mat4::Zero();
  for (int m = 0; m < 4; ++m) W += s.dx(m) * w[m];
  return W;
}

}  // namespace

AdaptationRotation adaptation_rotation(const Vec4& u) {
  const Vec3 n = u.tail<3>();
  const double un = n.norm();
  if (!(un > 0.0)) throw DomainError("adaptation_rotation: velocity has no spatial part");
  const double c = n(2) / un;  // cos(theta); u_3/u = -cos(theta)
  // r = eps^I_{J30} u^J is the axis u x z
  const Vec3 r(n(1), -n(0), 0.0);
  const double rn = r.norm();
  if (c < 0.0 && rn / un < kAdaptationTol)
    throw AdaptationSingular("adaptation undefined: photon moves along -z");
  AdaptationRotation out;
  Eigen::Matrix3d R3 = Eigen::Matrix3d::Identity();
  if (rn / un > 1e-300) {
    const Vec3 rh = r / rn;
    const double s = rn / un;  // sin(theta)
    Eigen::Matrix3d cross;
    cross << 0, -rh(2), rh(1), rh(2), 0, -rh(0), -rh(1), rh(0), 0;
    R3 = c * Eigen::Matrix3d::Identity() + (1.0 - c) * rh * rh.transpose() + s * cross;
  }
  out.R.block<3, 3>(1, 1) = R3;
  out.diad = out.R.block<2, 4>(1, 0);
  return out;
}

Vec4c canonical_gauge(const Vec4c& psi, const Vec4& u) {
  return psi - (psi(0) / u(0)) * u.cast<cplx>();
}

PhotonState canonical(PhotonState s) {
  s.pol = canonical_gauge(s.pol, s.at.u);
  return s;
}

cplx photon_inner_product(const PhotonState& a, const PhotonState& b) {
  if (!(a.at.x.chart == b.at.x.chart) ||
      (a.at.x.x - b.at.x.x).cwiseAbs().maxCoeff() >
          1e-9 * std::max(1.0, a.at.x.x.cwiseAbs().maxCoeff()) ||
      (a.at.u - b.at.u).cwiseAbs().maxCoeff() > 1e-9 * std::abs(a.at.u(0)))
    throw HilbertSpaceMismatch("photon_inner_product: wavevectors differ");
  return -(a.pol.adjoint() * eta().cast<cplx>() * b.pol)(0, 0);
}

double photon_norm_squared(const PhotonState& s) {
  return -(s.pol.adjoint() * eta().cast<cplx>() * s.pol)(0, 0).real();
}

double transversality(const PhotonState& s) {
  return std::abs((lower(s.at.u).cast<cplx>().transpose() * s.pol)(0, 0)) /
         std::abs(s.at.u(0));
}

Vec2c jones_vector(const PhotonState& s) {
  return adaptation_rotation(s.at.u).diad.cast<cplx>() * s.pol;
}

PhotonState from_jones(const Vec2c& jones, const HilbertLabel& at) {
  const Diad f = adaptation_rotation(at.u).diad;
  return PhotonState{f.transpose().cast<cplx>() * jones, at};
}

double helicity_plus(const Vec2c& j) {
  const Vec2c h(1.0 / std::sqrt(2.0), cplx(0.0, 1.0 / std::sqrt(2.0)));
  return std::norm(h.dot(j)) / j.squaredNorm();
}

Eigen::Matrix2d jones_rotation(double th) {
  Eigen::Matrix2d m;
  m << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
  return m;
}

PhotonTransport transport_photon(const PhotonState& state, const Worldline& wl, double tol) {
  require_null(wl, "transport_photon");
  const WorldlineSample s0 = wl.samples().front();
  if (!(state.at.x.chart == s0.x.chart) ||
      (state.at.x.x - s0.x.x).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, s0.x.x.cwiseAbs().maxCoeff()) ||
      (state.at.u - s0.u).cwiseAbs().maxCoeff() > 1e-9 * std::abs(s0.u(0)))
    throw HilbertSpaceMismatch("transport_photon: state is not labelled by the ray start");
  const SpacetimeModel& model = wl.model();
  auto rhs = [&](double p, const OdeVec<8>& y) {
    const WorldlineSample s = wl.at(p);
    const Mat4 W = velocity_connection(s, model.connection(s.x));
    const Vec4c psi = unpack(y);
    Vec4c d = -(W.cast<cplx>() * psi);
    // choose the gauge term so psi^0 stays zero
    d -= (d(0) / s.u(0)) * s.u.cast<cplx>();
    return pack(d);
  };
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  const PhotonState start = canonical(state);
  auto tr = dopri5<8>(rhs, wl.begin(), pack(start.pol), wl.end(), opt, wl.params());
  PhotonTransport out;
  const double n0 = photon_norm_squared(start);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const WorldlineSample s = wl.at(tr.t[i]);
    PhotonState st{unpack(tr.y[i]), label_at(s)};
    out.param.push_back(tr.t[i]);
    out.max_norm_drift = std::max(out.max_norm_drift, std::abs(photon_norm_squared(st) - n0) / n0);
    out.max_transversality = std::max(out.max_transversality, transversality(st) / std::sqrt(n0));
    out.states.push_back(st);
  }
  return out;
}

Mat4c photon_propagator(const Worldline& wl, double tol) {
  const HilbertLabel at = label_at(wl.samples().front());
  Mat4c K = Mat4c::Zero();
  const Diad f = adaptation_rotation(at.u).diad;
  // propagate the two diad vectors; the u direction maps to pure gauge
  for (int a = 0; a < 2; ++a) {
    PhotonState s{f.row(a).transpose().cast<cplx>(), at};
    PhotonState e = transport_photon(s, wl, tol).final_state();
    K += e.pol * f.row(a).cast<cplx>();
  }
  return K;
}

double wigner_rate(const Worldline& wl, double lambda) {
  const WorldlineSample s = wl.at(lambda);
  const Mat4 W = velocity_connection(s, wl.model().connection(s.x));
  const Vec4 du = s.a - W * s.u;
  // d/dlambda of R(u(lambda)) by a 4th-order difference along du
  const double dn = du.tail<3>().norm();
  Mat4 dR = Mat4::Zero();
  if (dn > 0.0) {
    const double h = 1e-3 * s.u.tail<3>().norm() / dn;
    auto Rof = [&](double t) { return adaptation_rotation(s.u + t * du).R; };
    dR = (-Rof(2 * h) + 8.0 * Rof(h) - 8.0 * Rof(-h) + Rof(-2 * h)) / (12.0 * h);
  }
  const Mat4 R = adaptation_rotation(s.u).R;
  // generator of the Jones evolution: d psi^A = -G^A_B psi^B
  const Mat4 G = R * W * R.transpose() + R * dR.transpose();
  return -G(1, 2);
}

WignerAngle wigner_rotation(const Worldline& wl, double tol) {
  require_null(wl, "wigner_rotation");
  auto rhs = [&](double p, const OdeVec<1>&) { return OdeVec<1>(wigner_rate(wl, p)); };
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  auto tr = dopri5<1>(rhs, wl.begin(), OdeVec<1>(0.0), wl.end(), opt, wl.params());
  WignerAngle out;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    out.param.push_back(tr.t[i]);
    out.angle.push_back(tr.y[i](0));
  }
  return out;
}

Eigen::Matrix2d lorentz_wigner(const Mat4& lambda, const Vec4& u) {
  const Diad f0 = adaptation_rotation(u).diad;
  const Diad f1 = adaptation_rotation(lambda * u).diad;
  return f1 * lambda * f0.transpose();
}

}  // namespace rqt
