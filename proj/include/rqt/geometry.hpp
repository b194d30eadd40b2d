#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "rqt/types.hpp"

namespace rqt {

struct ChartId {
  int value = 0;
  friend bool operator==(ChartId a, ChartId b) { return a.value == b.value; }
};

struct Event {
  Vec4 x = Vec4::Zero();
  ChartId chart{};
};

enum class ConnectionMode { analytic, finite_difference };

// Tetrad convention: tetrad(x)(mu, I) = e^mu_I, co_tetrad(x)(I, mu) = e^I_mu.
struct ModelFunctions {
  std::function<Mat4(const Vec4&)> tetrad;
  // dtetrad[nu](mu, I) = d_nu e^mu_I; optional
  std::function<std::array<Mat4, 4>(const Vec4&)> dtetrad;
  // optional; otherwise built from finite differences of the metric
  std::function<Christoffel(const Vec4&)> christoffel;
  std::function<bool(const Vec4&)> in_domain;
};

class SpacetimeModel {
 public:
  SpacetimeModel(std::string name, ChartId chart, ModelFunctions fns,
                 ConnectionMode mode);

  const std::string& name() const { return name_; }
  ChartId chart() const { return chart_; }
  ConnectionMode mode() const { return mode_; }
  double fd_step() const { return fd_step_; }

  SpacetimeModel with_mode(ConnectionMode mode) const;
  SpacetimeModel with_fd_step(double h) const;

  bool in_domain(const Vec4& x) const;
  // throws DomainError on chart mismatch or outside the domain
  void check(const Event& e) const;
  Event event(const Vec4& x) const { return Event{x, chart_}; }

  Mat4 tetrad(const Event& e) const;
  Mat4 co_tetrad(const Event& e) const;
  Mat4 metric(const Event& e) const;
  std::array<Mat4, 4> dtetrad(const Event& e) const;
  Christoffel christoffel(const Event& e) const;
  // omega[mu](I,J) = omega_mu^I_J
  Connection connection(const Event& e) const;

  const ModelFunctions& functions() const { return fns_; }

 private:
  Mat4 metric_at(const Vec4& x) const;
  std::array<Mat4, 4> dtetrad_fd(const Vec4& x) const;
  Christoffel christoffel_fd(const Vec4& x) const;

  std::string name_;
  ChartId chart_;
  ModelFunctions fns_;
  ConnectionMode mode_;
  double fd_step_ = 1e-5;
};

// 4th-order central difference of a matrix-valued function along axis nu
Mat4 central_diff4(const std::function<Mat4(const Vec4&)>& f, const Vec4& x,
                   int nu, double h);

// Local Lorentz field Lambda^I_J(x) with optional analytic derivative
// dlambda[nu] = d_nu Lambda.
struct LocalLorentzField {
  std::function<Mat4(const Vec4&)> lambda;
  std::function<std::array<Mat4, 4>(const Vec4&)> dlambda;
};

SpacetimeModel make_builtin_model(const std::string& name,
                                  const std::vector<double>& params,
                                  ConnectionMode mode = ConnectionMode::analytic);
SpacetimeModel minkowski_model();
SpacetimeModel rindler_model(double g);
SpacetimeModel schwarzschild_model(double mass);

// Tetrad sampled on a rectangular grid, multilinearly interpolated.
// samples are stored with axis 0 fastest.
struct TetradGrid {
  std::array<double, 4> lo{};
  std::array<double, 4> hi{};
  std::array<int, 4> n{};
  std::vector<Mat4> samples;
};
SpacetimeModel tabulated_model(std::string name, TetradGrid grid, int chart_id = 100);

// New model with tetrad e'_I = e_J (Lambda^-1)^J_I, i.e. vector components
// V'^I = Lambda^I_J V^J.
SpacetimeModel apply_local_lorentz(const SpacetimeModel& model,
                                   const LocalLorentzField& field);

// Inhomogeneous transformation of a connection:
// omega' = Lambda omega Lambda^-1 + Lambda d(Lambda^-1)
Connection transform_connection(const Connection& omega, const Mat4& lambda,
                                const std::array<Mat4, 4>& dlambda);

bool is_proper_lorentz(const Mat4& lambda, double tol = 1e-12);
Mat4 lorentz_inverse(const Mat4& lambda);

// lower the first index: omega_mu IJ
Mat4 lowered(const Mat4& omega_mu);

}  // namespace rqt
