#include "rqt/geometry.hpp"

#include <cmath>
#include <sstream>

#include "rqt/errors.hpp"

namespace rqt {

namespace {

Mat4 diag4(double a, double b, double c, double d) {
  return Vec4(a, b, c, d).asDiagonal();
}

std::array<Mat4, 4> zeros4() {
  std::array<Mat4, 4> z;
  for (auto& m : z) m.setZero();
  return z;
}

}  // namespace

Mat4 central_diff4(const std::function<Mat4(const Vec4&)>& f, const Vec4& x,
                   int nu, double h) {
  Vec4 d = Vec4::Zero();
  d(nu) = h;
  return (-f(x + 2 * d) + 8.0 * f(x + d) - 8.0 * f(x - d) + f(x - 2 * d)) /
         (12.0 * h);
}

Mat4 lorentz_inverse(const Mat4& lambda) { return eta() * lambda.transpose() * eta(); }

bool is_proper_lorentz(const Mat4& lambda, double tol) {
  double res = (lambda.transpose() * eta() * lambda - eta()).cwiseAbs().maxCoeff();
  return res < tol && std::abs(lambda.determinant() - 1.0) < 1e3 * tol &&
         lambda(0, 0) >= 1.0 - tol;
}

Mat4 lowered(const Mat4& omega_mu) { return eta() * omega_mu; }

SpacetimeModel::SpacetimeModel(std::string name, ChartId chart, ModelFunctions fns,
                               ConnectionMode mode)
    : name_(std::move(name)), chart_(chart), fns_(std::move(fns)), mode_(mode) {
  if (!fns_.tetrad) throw InvalidArgument("model '" + name_ + "' has no tetrad");
  if (mode_ == ConnectionMode::analytic && (!fns_.dtetrad || !fns_.christoffel))
    mode_ = ConnectionMode::finite_difference;
}

SpacetimeModel SpacetimeModel::with_mode(ConnectionMode mode) const {
  SpacetimeModel m = *this;
  m.mode_ = mode;
  if (mode == ConnectionMode::analytic && (!fns_.dtetrad || !fns_.christoffel))
    m.mode_ = ConnectionMode::finite_difference;
  return m;
}

SpacetimeModel SpacetimeModel::with_fd_step(double h) const {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  SpacetimeModel m = *this;
  m.fd_step_ = h;
  return m;
}

bool SpacetimeModel::in_domain(const Vec4& x) const {
  if (!x.allFinite()) return false;
  return !fns_.in_domain || fns_.in_domain(x);
}

void SpacetimeModel::check(const Event& e) const {
  if (!(e.chart == chart_)) {
    std::ostringstream os;
    os << "event chart " << e.chart.value << " does not belong to model '" << name_
       << "'";
    throw DomainError(os.str());
  }
  if (!in_domain(e.x)) {
    std::ostringstream os;
    os << "event (" << e.x.transpose() << ") outside the domain of '" << name_ << "'";
    throw DomainError(os.str());
  }
}

Mat4 SpacetimeModel::tetrad(const Event& e) const {
  check(e);
  return fns_.tetrad(e.x);
}

Mat4 SpacetimeModel::co_tetrad(const Event& e) const { return tetrad(e).inverse(); }

Mat4 SpacetimeModel::metric_at(const Vec4& x) const {
  Mat4 c = fns_.tetrad(x).inverse();
  return c.transpose() * eta() * c;
}

Mat4 SpacetimeModel::metric(const Event& e) const {
  check(e);
  return metric_at(e.x);
}

std::array<Mat4, 4> SpacetimeModel::dtetrad_fd(const Vec4& x) const {
  std::array<Mat4, 4> d;
  for (int nu = 0; nu < 4; ++nu) d[nu] = central_diff4(fns_.tetrad, x, nu, fd_step_);
  return d;
}

std::array<Mat4, 4> SpacetimeModel::dtetrad(const Event& e) const {
  check(e);
  if (mode_ == ConnectionMode::analytic) return fns_.dtetrad(e.x);
  return dtetrad_fd(e.x);
}

Christoffel SpacetimeModel::christoffel_fd(const Vec4& x) const {
  std::function<Mat4(const Vec4&)> gf = [this](const Vec4& y) { return metric_at(y); };
  std::array<Mat4, 4> dg;  // dg[l](m,n) = d_l g_mn
  for (int l = 0; l < 4; ++l) dg[l] = central_diff4(gf, x, l, fd_step_);
  Mat4 ginv = metric_at(x).inverse();
  Christoffel gam;
  for (int s = 0; s < 4; ++s) {
    gam[s].setZero();
    for (int n = 0; n < 4; ++n)
      for (int r = 0; r < 4; ++r) {
        double acc = 0.0;
        for (int l = 0; l < 4; ++l)
          acc += ginv(s, l) * (dg[n](l, r) + dg[r](l, n) - dg[l](n, r));
        gam[s](n, r) = 0.5 * acc;
      }
  }
  return gam;
}

Christoffel SpacetimeModel::christoffel(const Event& e) const {
  check(e);
  if (mode_ == ConnectionMode::analytic) return fns_.christoffel(e.x);
  return christoffel_fd(e.x);
}

Connection SpacetimeModel::connection(const Event& e) const {
  check(e);
  const Mat4 E = fns_.tetrad(e.x);
  const Mat4 C = E.inverse();
  const auto dE = mode_ == ConnectionMode::analytic ? fns_.dtetrad(e.x) : dtetrad_fd(e.x);
  const Christoffel gam =
      mode_ == ConnectionMode::analytic ? fns_.christoffel(e.x) : christoffel_fd(e.x);
  Connection w;
  for (int nu = 0; nu < 4; ++nu) {
    Mat4 G;  // G(s, r) = Gamma^s_{nu r}
    for (int s = 0; s < 4; ++s) G.row(s) = gam[s].row(nu);
    w[nu] = C * dE[nu] + C * G * E;
  }
  return w;
}

SpacetimeModel minkowski_model() {
  ModelFunctions f;
  f.tetrad = [](const Vec4&) { return Mat4::Identity().eval(); };
  f.dtetrad = [](const Vec4&) { return zeros4(); };
  f.christoffel = [](const Vec4&) { return zeros4(); };
  return SpacetimeModel("minkowski", ChartId{1}, f, ConnectionMode::analytic);
}

SpacetimeModel rindler_model(double g) {
  if (!(g > 0.0) || !std::isfinite(g))
    throw DomainError("rindler: acceleration g must be positive");
  ModelFunctions f;
  f.in_domain = [g](const Vec4& x) { return 1.0 + g * x(3) > 0.0; };
  f.tetrad = [g](const Vec4& x) { return diag4(1.0 / (1.0 + g * x(3)), 1, 1, 1); };
  f.dtetrad = [g](const Vec4& x) {
    auto d = zeros4();
    double h = 1.0 + g * x(3);
    d[3](0, 0) = -g / (h * h);
    return d;
  };
  f.christoffel = [g](const Vec4& x) {
    auto c = zeros4();
    double h = 1.0 + g * x(3);
    c[0](0, 3) = c[0](3, 0) = g / h;
    c[3](0, 0) = g * h;
    return c;
  };
  return SpacetimeModel("rindler", ChartId{2}, f, ConnectionMode::analytic);
}

SpacetimeModel schwarzschild_model(double M) {
  if (!(M > 0.0) || !std::isfinite(M))
    throw DomainError("schwarzschild: mass must be positive");
  ModelFunctions f;
  f.in_domain = [M](const Vec4& x) {
    return x(1) > 2.0 * M && x(2) > 0.0 && x(2) < kPi;
  };
  f.tetrad = [M](const Vec4& x) {
    double r = x(1), s = std::sin(x(2));
    double fr = 1.0 - 2.0 * M / r;
    return diag4(1.0 / std::sqrt(fr), std::sqrt(fr), 1.0 / r, 1.0 / (r * s));
  };
  f.dtetrad = [M](const Vec4& x) {
    auto d = zeros4();
    double r = x(1), th = x(2), s = std::sin(th);
    double fr = 1.0 - 2.0 * M / r, fp = 2.0 * M / (r * r);
    d[1](0, 0) = -0.5 * fp / (fr * std::sqrt(fr));
    d[1](1, 1) = 0.5 * fp / std::sqrt(fr);
    d[1](2, 2) = -1.0 / (r * r);
    d[1](3, 3) = -1.0 / (r * r * s);
    d[2](3, 3) = -std::cos(th) / (r * s * s);
    return d;
  };
  f.christoffel = [M](const Vec4& x) {
    auto c = zeros4();
    double r = x(1), th = x(2), s = std::sin(th), co = std::cos(th);
    double fr = 1.0 - 2.0 * M / r;
    c[0](0, 1) = c[0](1, 0) = M / (r * r * fr);
    c[1](0, 0) = M * fr / (r * r);
    c[1](1, 1) = -M / (r * r * fr);
    c[1](2, 2) = -r * fr;
    c[1](3, 3) = -r * fr * s * s;
    c[2](1, 2) = c[2](2, 1) = 1.0 / r;
    c[2](3, 3) = -s * co;
    c[3](1, 3) = c[3](3, 1) = 1.0 / r;
    c[3](2, 3) = c[3](3, 2) = co / s;
    return c;
  };
  return SpacetimeModel("schwarzschild", ChartId{3}, f, ConnectionMode::analytic);
}

SpacetimeModel make_builtin_model(const std::string& name,
                                  const std::vector<double>& params,
                                  ConnectionMode mode) {
  auto need = [&](std::size_t n) {
    if (params.size() != n)
      throw InvalidArgument("model '" + name + "' expects " + std::to_string(n) +
                            " parameter(s)");
  };
  if (name == "minkowski") {
    need(0);
    return minkowski_model().with_mode(mode);
  }
  if (name == "rindler") {
    need(1);
    return rindler_model(params[0]).with_mode(mode);
  }
  if (name == "schwarzschild") {
    need(1);
    return schwarzschild_model(params[0]).with_mode(mode);
  }
  throw InvalidArgument("unknown model family '" + name + "'");
}

SpacetimeModel tabulated_model(std::string name, TetradGrid grid, int chart_id) {
  std::size_t total = 1;
  for (int k = 0; k < 4; ++k) {
    if (grid.n[k] < 1) throw InvalidArgument("tabulated model: empty grid axis");
    if (grid.n[k] > 1 && !(grid.hi[k] > grid.lo[k]))
      throw InvalidArgument("tabulated model: axis bounds out of order");
    total *= static_cast<std::size_t>(grid.n[k]);
  }
  if (grid.samples.size() != total)
    throw InvalidArgument("tabulated model: sample count does not match grid");
  auto g = std::make_shared<const TetradGrid>(std::move(grid));
  ModelFunctions f;
  f.in_domain = [g](const Vec4& x) {
    for (int k = 0; k < 4; ++k)
      if (g->n[k] > 1 && (x(k) < g->lo[k] || x(k) > g->hi[k])) return false;
    return true;
  };
  f.tetrad = [g](const Vec4& x) {
    std::array<int, 4> i0{};
    std::array<double, 4> w{};
    for (int k = 0; k < 4; ++k) {
      if (g->n[k] == 1) {
        i0[k] = 0;
        w[k] = 0.0;
        continue;
      }
      double step = (g->hi[k] - g->lo[k]) / (g->n[k] - 1);
      double s = (x(k) - g->lo[k]) / step;
      int i = static_cast<int>(std::floor(s));
      i = std::clamp(i, 0, g->n[k] - 2);
      i0[k] = i;
      w[k] = s - i;  // may leave [0,1] outside the box: linear extrapolation
    }
    Mat4 acc = Mat4::Zero();
    for (int corner = 0; corner < 16; ++corner) {
      double wt = 1.0;
      std::size_t idx = 0, stride = 1;
      for (int k = 0; k < 4; ++k) {
        int bit = (corner >> k) & 1;
        if (g->n[k] == 1 && bit) {
          wt = 0.0;
          break;
        }
        wt *= bit ? w[k] : 1.0 - w[k];
        idx += static_cast<std::size_t>(i0[k] + bit) * stride;
        stride *= static_cast<std::size_t>(g->n[k]);
      }
      if (wt != 0.0) acc += wt * g->samples[idx];
    }
    return acc;
  };
  return SpacetimeModel(std::move(name), ChartId{chart_id}, f,
                        ConnectionMode::finite_difference);
}

Connection transform_connection(const Connection& omega, const Mat4& lambda,
                                const std::array<Mat4, 4>& dlambda) {
  const Mat4 inv = lorentz_inverse(lambda);
  Connection out;
  for (int mu = 0; mu < 4; ++mu) {
    // d(Lambda^-1) = -Lambda^-1 dLambda Lambda^-1
    Mat4 dinv = -inv * dlambda[mu] * inv;
    out[mu] = lambda * omega[mu] * inv + lambda * dinv;
  }
  return out;
}

SpacetimeModel apply_local_lorentz(const SpacetimeModel& model,
                                   const LocalLorentzField& field) {
  if (!field.lambda) throw InvalidArgument("local Lorentz field has no value");
  const ModelFunctions base = model.functions();
  ModelFunctions f;
  f.in_domain = base.in_domain;
  f.christoffel = base.christoffel;
  auto lam = field.lambda;
  f.tetrad = [base, lam](const Vec4& x) {
    Mat4 L = lam(x);
    if (!is_proper_lorentz(L, 1e-10))
      throw InvalidArgument("local Lorentz field is not a proper Lorentz matrix");
    return (base.tetrad(x) * lorentz_inverse(L)).eval();
  };
  if (base.dtetrad && field.dlambda) {
    auto dlam = field.dlambda;
    f.dtetrad = [base, lam, dlam](const Vec4& x) {
      Mat4 L = lam(x);
      Mat4 inv = lorentz_inverse(L);
      Mat4 E = base.tetrad(x);
      auto dE = base.dtetrad(x);
      auto dL = dlam(x);
      std::array<Mat4, 4> out;
      for (int nu = 0; nu < 4; ++nu) out[nu] = dE[nu] * inv + E * (-inv * dL[nu] * inv);
      return out;
    };
  }
  SpacetimeModel m(model.name() + "+lorentz", model.chart(), f, model.mode());
  return m.with_fd_step(model.fd_step());
}

}  // namespace rqt
