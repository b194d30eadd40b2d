#include "rqt/worldline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "rqt/errors.hpp"
#include "rqt/spin_algebra.hpp"

namespace rqt {

EMField no_field() { return EMField{}; }

Mat4 field_tensor(const Vec3& E, const Vec3& B) {
  Mat4 F = Mat4::Zero();
  for (int i = 1; i <= 3; ++i) {
    F(0, i) = E(i - 1);
    F(i, 0) = -E(i - 1);
  }
  F(1, 2) = -B(2);
  F(2, 1) = B(2);
  F(2, 3) = -B(0);
  F(3, 2) = B(0);
  F(3, 1) = -B(1);
  F(1, 3) = B(1);
  return F;
}

EMField uniform_field(const Vec3& E, const Vec3& B) {
  EMField em;
  Mat4 F = field_tensor(E, B);
  em.F = [F](const Event&) { return F; };
  return em;
}

Worldline::Worldline(std::shared_ptr<const SpacetimeModel> model, WorldlineKind kind,
                     std::vector<WorldlineSample> samples, Evaluator eval)
    : model_(std::move(model)), kind_(kind), samples_(std::move(samples)),
      eval_(std::move(eval)) {
  if (samples_.empty()) throw InvalidArgument("worldline has no samples");
  if (!std::is_sorted(samples_.begin(), samples_.end(),
                      [](const auto& a, const auto& b) { return a.param < b.param; }))
    throw InvalidArgument("worldline samples must be ordered by parameter");
}

WorldlineSample Worldline::at(double p) const {
  const double lo = begin(), hi = end();
  const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  if (p < lo - slack || p > hi + slack)
    throw DomainError("worldline parameter " + std::to_string(p) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return eval_(std::clamp(p, lo, hi));
}

std::vector<double> Worldline::params() const {
  std::vector<double> p;
  p.reserve(samples_.size());
  for (const auto& s : samples_) p.push_back(s.param);
  return p;
}

double Worldline::norm_residual() const {
  double target = kind_ == WorldlineKind::timelike ? 1.0 : 0.0;
  double r = 0.0;
  for (const auto& s : samples_) {
    double n = mdot(s.u, s.u);
    double scale = kind_ == WorldlineKind::null ? s.u(0) * s.u(0) : 1.0;
    r = std::max(r, std::abs(n - target) / scale);
  }
  return r;
}

double Worldline::orthogonality_residual() const {
  double r = 0.0;
  for (const auto& s : samples_) r = std::max(r, std::abs(mdot(s.u, s.a)));
  return r;
}

void Worldline::write_csv(std::ostream& os) const {
  os << "param,x0,x1,x2,x3,u0,u1,u2,u3,a0,a1,a2,a3\n";
  os << std::setprecision(17);
  for (const auto& s : samples_) {
    os << s.param;
    for (int i = 0; i < 4; ++i) os << ',' << s.x.x(i);
    for (int i = 0; i < 4; ++i) os << ',' << s.u(i);
    for (int i = 0; i < 4; ++i) os << ',' << s.a(i);
    os << '\n';
  }
}

WorldlineSample make_sample(const SpacetimeModel& model, double p, const Vec4& x,
                            const Vec4& dx, const Vec4& ddx) {
  WorldlineSample s;
  s.param = p;
  s.x = model.event(x);
  const Mat4 C = model.co_tetrad(s.x);
  const Christoffel G = model.christoffel(s.x);
  Vec4 acc = ddx;
  for (int m = 0; m < 4; ++m) acc(m) += dx.dot(G[m] * dx);
  s.u = C * dx;
  s.a = C * acc;
  s.dx = dx;
  s.ddx = ddx;
  return s;
}

namespace {

// Quintic Hermite interpolation of x(p) from x, dx, ddx at both ends.
struct Node {
  double t;
  Vec4 x, dx, ddx;
};

void hermite5(const Node& a, const Node& b, double p, Vec4& x, Vec4& dx, Vec4& ddx) {
  const double h = b.t - a.t;
  const double s = (p - a.t) / h;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
  // basis values, first and second derivatives in s
  const double h0 = 1 - 10 * s3 + 15 * s4 - 6 * s5, h0p = -30 * s2 + 60 * s3 - 30 * s4,
               h0pp = -60 * s + 180 * s2 - 120 * s3;
  const double h1 = s - 6 * s3 + 8 * s4 - 3 * s5, h1p = 1 - 18 * s2 + 32 * s3 - 15 * s4,
               h1pp = -36 * s + 96 * s2 - 60 * s3;
  const double h2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5,
               h2p = s - 4.5 * s2 + 6 * s3 - 2.5 * s4, h2pp = 1 - 9 * s + 18 * s2 - 10 * s3;
  const double h3 = 0.5 * s3 - s4 + 0.5 * s5, h3p = 1.5 * s2 - 4 * s3 + 2.5 * s4,
               h3pp = 3 * s - 12 * s2 + 10 * s3;
  const double h4 = -4 * s3 + 7 * s4 - 3 * s5, h4p = -12 * s2 + 28 * s3 - 15 * s4,
               h4pp = -24 * s + 84 * s2 - 60 * s3;
  const double h5 = 10 * s3 - 15 * s4 + 6 * s5, h5p = 30 * s2 - 60 * s3 + 30 * s4,
               h5pp = 60 * s - 180 * s2 + 120 * s3;
  x = h0 * a.x + h * h1 * a.dx + h * h * h2 * a.ddx + h5 * b.x + h * h4 * b.dx +
      h * h * h3 * b.ddx;
  dx = (h0p * a.x + h5p * b.x) / h + h1p * a.dx + h4p * b.dx +
       h * (h2p * a.ddx + h3p * b.ddx);
  ddx = (h0pp * a.x + h5pp * b.x) / (h * h) + (h1pp * a.dx + h4pp * b.dx) / h +
        h2pp * a.ddx + h3pp * b.ddx;
}

Worldline from_trajectory(std::shared_ptr<const SpacetimeModel> model, WorldlineKind kind,
                          const OdeTrajectory<8>& tr) {
  auto nodes = std::make_shared<std::vector<Node>>();
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    nodes->push_back(Node{tr.t[i], tr.y[i].head<4>(), tr.y[i].tail<4>(), tr.f[i].tail<4>()});
  if (nodes->size() > 1 && nodes->front().t > nodes->back().t)
    std::reverse(nodes->begin(), nodes->end());
  std::vector<WorldlineSample> samples;
  samples.reserve(nodes->size());
  for (const auto& n : *nodes) samples.push_back(make_sample(*model, n.t, n.x, n.dx, n.ddx));
  const SpacetimeModel* mp = model.get();
  auto eval = [nodes, mp, samples](double p) -> WorldlineSample {
    const auto& nd = *nodes;
    auto it = std::lower_bound(nd.begin(), nd.end(), p,
                               [](const Node& n, double v) { return n.t < v; });
    if (it != nd.end() && it->t == p) return samples[static_cast<std::size_t>(it - nd.begin())];
    if (it == nd.begin()) return samples.front();
    if (it == nd.end()) return samples.back();
    Vec4 x, dx, ddx;
    hermite5(*(it - 1), *it, p, x, dx, ddx);
    return make_sample(*mp, p, x, dx, ddx);
  };
  return Worldline(std::move(model), kind, std::move(samples), eval);
}

OdeTrajectory<8> integrate_geodesic_like(const SpacetimeModel& model, const EMField& em,
                                         const Event& x0, const Vec4& dx0, double qm,
                                         double span, double tol) {
  auto rhs = [&](double, const OdeVec<8>& y) {
    const Vec4 x = y.head<4>(), dx = y.tail<4>();
    const Event e = model.event(x);
    const Christoffel G = model.christoffel(e);
    Vec4 ddx;
    for (int m = 0; m < 4; ++m) ddx(m) = -dx.dot(G[m] * dx);
    if (!em.empty() && qm != 0.0) {
      const Mat4 E = model.tetrad(e);
      const Vec4 u = E.inverse() * dx;
      // a_I = -(q/m) u^J F_JI, raised with eta
      const Vec4 a_low = -qm * (em.F(e).transpose() * u);
      ddx += E * (eta() * a_low);
    }
    OdeVec<8> out;
    out << dx, ddx;
    return out;
  };
  OdeVec<8> y0;
  y0 << x0.x, dx0;
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  return dopri5<8>(rhs, 0.0, y0, span, opt);
}

}  // namespace

Worldline integrate_timelike(std::shared_ptr<const SpacetimeModel> model,
                             const EMField& em, const Event& x0, const Vec4& u0,
                             double charge_to_mass, double span, double tol) {
  model->check(x0);
  if (!(u0(0) > 0.0) || std::abs(mdot(u0, u0) - 1.0) > 1e-9)
    throw DomainError("integrate_timelike: u0 must be a future unit timelike vector");
  if (span == 0.0 || !std::isfinite(span))
    throw InvalidArgument("integrate_timelike: span must be nonzero and finite");
  const Vec4 dx0 = model->tetrad(x0) * u0;
  auto tr = integrate_geodesic_like(*model, em, x0, dx0, charge_to_mass, span, tol);
  return from_trajectory(std::move(model), WorldlineKind::timelike, tr);
}

Worldline integrate_null_geodesic(std::shared_ptr<const SpacetimeModel> model,
                                  const Event& x0, const Vec4& k0, double span,
                                  double tol) {
  model->check(x0);
  if (!(k0(0) > 0.0) || std::abs(mdot(k0, k0)) > 1e-12 * k0(0) * k0(0))
    throw DomainError("integrate_null_geodesic: k0 must be future null");
  if (span == 0.0 || !std::isfinite(span))
    throw InvalidArgument("integrate_null_geodesic: span must be nonzero and finite");
  const Vec4 dx0 = model->tetrad(x0) * k0;
  auto tr = integrate_geodesic_like(*model, no_field(), x0, dx0, 0.0, span, tol);
  return from_trajectory(std::move(model), WorldlineKind::null, tr);
}

Worldline worldline_from_path(std::shared_ptr<const SpacetimeModel> model,
                              WorldlineKind kind, const CoordinatePath& path, double p0,
                              double p1, int nsamples) {
  if (nsamples < 2) throw InvalidArgument("worldline_from_path: need at least 2 samples");
  if (!(p1 > p0)) throw InvalidArgument("worldline_from_path: empty parameter range");
  std::vector<WorldlineSample> samples;
  for (int i = 0; i < nsamples; ++i) {
    double p = i == nsamples - 1 ? p1 : p0 + (p1 - p0) * i / (nsamples - 1);
    samples.push_back(make_sample(*model, p, path.x(p), path.dx(p), path.ddx(p)));
  }
  const SpacetimeModel* mp = model.get();
  auto eval = [mp, path](double p) { return make_sample(*mp, p, path.x(p), path.dx(p), path.ddx(p)); };
  return Worldline(std::move(model), kind, std::move(samples), eval);
}

Worldline static_observer(std::shared_ptr<const SpacetimeModel> model, const Event& x0,
                          double span, int nsamples) {
  const Mat4 g = model->metric(x0);
  if (!(g(0, 0) > 0.0)) throw DomainError("static_observer: d_t is not timelike here");
  const double lapse = std::sqrt(g(0, 0));
  const Vec4 start = x0.x;
  CoordinatePath path;
  path.x = [start, lapse](double t) {
    Vec4 x = start;
    x(0) += t / lapse;
    return x;
  };
  path.dx = [lapse](double) { return Vec4(1.0 / lapse, 0, 0, 0); };
  path.ddx = [](double) { return Vec4::Zero().eval(); };
  return worldline_from_path(std::move(model), WorldlineKind::timelike, path, 0.0, span,
                             nsamples);
}

Worldline circular_orbit(std::shared_ptr<const SpacetimeModel> minkowski, double R,
                         double beta, double revolutions, int nsamples) {
  if (!(R > 0.0) || !(beta > 0.0 && beta < 1.0))
    throw DomainError("circular_orbit: need R > 0 and 0 < beta < 1");
  const double gamma = 1.0 / std::sqrt(1.0 - beta * beta);
  const double w = gamma * beta / R;  // d(phase)/dtau
  const double T = revolutions * 2.0 * kPi / w;
  CoordinatePath path;
  path.x = [=](double tau) {
    return Vec4(gamma * tau, R * std::cos(w * tau), R * std::sin(w * tau), 0.0);
  };
  path.dx = [=](double tau) {
    return Vec4(gamma, -R * w * std::sin(w * tau), R * w * std::cos(w * tau), 0.0);
  };
  path.ddx = [=](double tau) {
    return Vec4(0.0, -R * w * w * std::cos(w * tau), -R * w * w * std::sin(w * tau), 0.0);
  };
  return worldline_from_path(std::move(minkowski), WorldlineKind::timelike, path, 0.0, T,
                             nsamples);
}

std::vector<double> killing_energy(const Worldline& wl, const Vec4& xi, double mass) {
  std::vector<double> e;
  for (const auto& s : wl.samples()) {
    const Mat4 g = wl.model().metric(s.x);
    e.push_back(mass * xi.dot(g * s.dx));
  }
  return e;
}

double rindler_speed_at_height(double v1, double g, double dz) {
  const double eps = dz * g;
  const double g00 = (1.0 + eps) * (1.0 + eps);
  const double gm1 = eps * (2.0 + eps);
  const double v2sq = g00 * (v1 * v1 - gm1 * (1.0 - v1 * v1));
  if (!(v2sq > 0.0))
    throw ComplexVelocity("particle cannot reach height " + std::to_string(dz));
  return std::sqrt(v2sq);
}

VectorTransport parallel_transport_vector(const Worldline& wl, const Vec4& v0, double tol) {
  const SpacetimeModel& model = wl.model();
  auto rhs = [&](double p, const OdeVec<4>& v) {
    const WorldlineSample s = wl.at(p);
    const Connection w = model.connection(s.x);
    Mat4 X = Mat4::Zero();
    for (int m = 0; m < 4; ++m) X += s.dx(m) * w[m];
    return OdeVec<4>(-X * v);
  };
  OdeOptions opt;
  opt.rtol = tol;
  opt.atol = tol * 1e-2;
  auto tr = dopri5<4>(rhs, wl.begin(), v0, wl.end(), opt, wl.params());
  VectorTransport out;
  const double n0 = mdot(v0, v0);
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    out.param.push_back(tr.t[i]);
    out.v.push_back(tr.y[i]);
    out.norm_drift = std::max(out.norm_drift, std::abs(mdot(tr.y[i], tr.y[i]) - n0));
  }
  return out;
}

double congruence_divergence(std::shared_ptr<const SpacetimeModel> model,
                             const EMField& em, const Event& x0, const Vec4& u0,
                             double charge_to_mass, double span, double spread) {
  auto end_of = [&](const Vec4& x) {
    Worldline w =
        integrate_timelike(model, em, model->event(x), u0, charge_to_mass, span, 1e-11);
    return w.samples().back();
  };
  // volume of three separation vectors projected orthogonal to u
  auto gram = [](const std::array<Vec4, 3>& s, const Vec4& u) {
    Eigen::Matrix3d G;
    std::array<Vec4, 3> p;
    for (int i = 0; i < 3; ++i) p[i] = s[i] - mdot(u, s[i]) * u;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) G(i, j) = -mdot(p[i], p[j]);
    return std::sqrt(std::abs(G.determinant()));
  };
  const Mat4 E = model->tetrad(x0);
  const Mat4 B = vector_boost(u0);
  const WorldlineSample c = end_of(x0.x);
  const Mat4 Cc = model->tetrad(c.x).inverse();
  std::array<Vec4, 3> s0, s1;
  for (int k = 0; k < 3; ++k) {
    s0[k] = spread * B.col(k + 1);
    const WorldlineSample s = end_of(x0.x + E * s0[k]);
    s1[k] = Cc * (s.x.x - c.x.x);
  }
  return std::log(gram(s1, c.u) / gram(s0, u0)) / span;
}

}  // namespace rqt
