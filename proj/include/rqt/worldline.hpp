#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "rqt/geometry.hpp"
#include "rqt/ode.hpp"

namespace rqt {

enum class WorldlineKind { timelike, null };

// u and a are tetrad components; dx and ddx are coordinate derivatives with
// respect to the parameter.
struct WorldlineSample {
  double param = 0.0;
  Event x;
  Vec4 u = Vec4::Zero();
  Vec4 a = Vec4::Zero();
  Vec4 dx = Vec4::Zero();
  Vec4 ddx = Vec4::Zero();
};

struct EMField {
  // F_IJ in tetrad components (both indices down)
  std::function<Mat4(const Event&)> F;
  // A_mu in coordinate components
  std::function<Vec4(const Event&)> A;
  bool empty() const { return !F; }
};

EMField no_field();
// Uniform field specified by E^i and B^i in tetrad components:
// F_0i = E^i, F_ij = -eps_ijk B^k
EMField uniform_field(const Vec3& E, const Vec3& B);
Mat4 field_tensor(const Vec3& E, const Vec3& B);

class Worldline {
 public:
  using Evaluator = std::function<WorldlineSample(double)>;

  Worldline(std::shared_ptr<const SpacetimeModel> model, WorldlineKind kind,
            std::vector<WorldlineSample> samples, Evaluator eval);

  WorldlineKind kind() const { return kind_; }
  const SpacetimeModel& model() const { return *model_; }
  std::shared_ptr<const SpacetimeModel> model_ptr() const { return model_; }
  const std::vector<WorldlineSample>& samples() const { return samples_; }
  double begin() const { return samples_.front().param; }
  double end() const { return samples_.back().param; }
  // continuous evaluation; throws DomainError outside [begin, end]
  WorldlineSample at(double p) const;
  std::vector<double> params() const;

  // largest |u.u - target| and |u.a| over the stored samples
  double norm_residual() const;
  double orthogonality_residual() const;

  void write_csv(std::ostream& os) const;

 private:
  std::shared_ptr<const SpacetimeModel> model_;
  WorldlineKind kind_;
  std::vector<WorldlineSample> samples_;
  Evaluator eval_;
};

// Fill u, a from coordinate data: u = e^I_mu dx^mu, a = e^I_mu (ddx + Gamma dx dx)
WorldlineSample make_sample(const SpacetimeModel& model, double p, const Vec4& x,
                            const Vec4& dx, const Vec4& ddx);

// Lorentz-force trajectory; u0 in tetrad components, span in proper time.
Worldline integrate_timelike(std::shared_ptr<const SpacetimeModel> model,
                             const EMField& em, const Event& x0, const Vec4& u0,
                             double charge_to_mass, double span, double tol);

// Affinely parametrised null geodesic; k0 in tetrad components.
Worldline integrate_null_geodesic(std::shared_ptr<const SpacetimeModel> model,
                                  const Event& x0, const Vec4& k0, double span,
                                  double tol);

// Worldline from a closed-form coordinate path x(p) with derivatives.
struct CoordinatePath {
  std::function<Vec4(double)> x, dx, ddx;
};
Worldline worldline_from_path(std::shared_ptr<const SpacetimeModel> model,
                              WorldlineKind kind, const CoordinatePath& path,
                              double p0, double p1, int nsamples);

// Observer following the static Killing field d_t, proper time span.
Worldline static_observer(std::shared_ptr<const SpacetimeModel> model,
                          const Event& x0, double span, int nsamples = 201);

// Flat-space circular orbit in the xy plane, counterclockwise, radius R,
// speed beta, proper-time parametrised.
Worldline circular_orbit(std::shared_ptr<const SpacetimeModel> minkowski, double radius,
                         double beta, double revolutions, int nsamples = 401);

// E = p_mu xi^mu per sample with p = m u (coordinate, index lowered)
std::vector<double> killing_energy(const Worldline& wl, const Vec4& xi, double mass = 1.0);

// Coordinate speed v2 at height dz in Rindler from energy conservation given
// v1 at z = 0: gamma2 g00 = gamma1.
double rindler_speed_at_height(double v1, double g, double dz);

// Parallel transport of V0 (tetrad components) along the worldline.
struct VectorTransport {
  std::vector<double> param;
  std::vector<Vec4> v;
  double norm_drift = 0.0;
};
VectorTransport parallel_transport_vector(const Worldline& wl, const Vec4& v0, double tol);

// Expansion estimate d_mu u^mu from a congruence of neighbouring launch
// points; diagnostic only.
double congruence_divergence(std::shared_ptr<const SpacetimeModel> model,
                             const EMField& em, const Event& x0, const Vec4& u0,
                             double charge_to_mass, double span, double spread);

}  // namespace rqt
