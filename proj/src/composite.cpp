#include "rqt/composite.hpp"

#include <cmath>
#include <random>

#include "rqt/errors.hpp"
#include "rqt/spin_algebra.hpp"

namespace rqt {

namespace {

using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

void check_slot(int slot) {
  if (slot != 0 && slot != 1) throw InvalidArgument("slot must be 0 or 1");
}

void check_shape(const BipartiteState& s) {
  if (s.coeffs.rows() != slot_dim(s.kinds[0]) || s.coeffs.cols() != slot_dim(s.kinds[1]))
    throw InvalidArgument("coefficient array does not match the slot kinds");
}

}  // namespace

int slot_dim(SlotKind k) { return k == SlotKind::fermion ? 2 : 4; }

BipartiteState product_state(const FermionState& a, const FermionState& b) {
  BipartiteState s;
  s.coeffs = a.psi * b.psi.transpose();
  s.labels = {a.at, b.at};
  return s;
}

BipartiteState product_state(const PhotonState& a, const PhotonState& b) {
  BipartiteState s;
  s.kinds = {SlotKind::photon, SlotKind::photon};
  s.coeffs = a.pol * b.pol.transpose();
  s.labels = {a.at, b.at};
  return s;
}

BipartiteState product_state(const PhotonState& a, const FermionState& b) {
  BipartiteState s;
  s.kinds = {SlotKind::photon, SlotKind::fermion};
  s.coeffs = a.pol * b.psi.transpose();
  s.labels = {a.at, b.at};
  return s;
}

BipartiteState singlet(const Event& x1, const Event& x2) {
  BipartiteState s;
  s.coeffs = MatX::Zero(2, 2);
  s.coeffs(0, 1) = 1.0 / std::sqrt(2.0);
  s.coeffs(1, 0) = -1.0 / std::sqrt(2.0);
  s.labels = {HilbertLabel{x1, Vec4(1, 0, 0, 0)}, HilbertLabel{x2, Vec4(1, 0, 0, 0)}};
  return s;
}

MatX slot_gram(SlotKind k, const HilbertLabel& at) {
  if (k == SlotKind::fermion) return sigma_bar_dot(at.u);
  return (-eta()).cast<cplx>();
}

cplx bipartite_inner_product(const BipartiteState& a, const BipartiteState& b) {
  check_shape(a);
  check_shape(b);
  if (a.kinds != b.kinds) throw HilbertSpaceMismatch("bipartite states of different kinds");
  for (int k = 0; k < 2; ++k)
    if (!same_label(a.labels[k], b.labels[k]))
      throw HilbertSpaceMismatch("slot " + std::to_string(k) + " labels differ");
  const MatX G1 = slot_gram(a.kinds[0], a.labels[0]);
  const MatX G2 = slot_gram(a.kinds[1], a.labels[1]);
  return (a.coeffs.adjoint() * G1 * b.coeffs * G2.transpose()).trace();
}

double bipartite_norm_squared(const BipartiteState& s) {
  return bipartite_inner_product(s, s).real();
}

double transversality_residual(const BipartiteState& s) {
  double r = 0.0;
  for (int k = 0; k < 2; ++k) {
    if (s.kinds[k] != SlotKind::photon) continue;
    const Eigen::RowVector4cd ul = lower(s.labels[k].u).cast<cplx>().transpose();
    const MatX c = k == 0 ? MatX(ul * s.coeffs) : MatX(s.coeffs * ul.transpose());
    r = std::max(r, c.cwiseAbs().maxCoeff() / std::abs(s.labels[k].u(0)));
  }
  return r;
}

BipartiteState apply_local(const BipartiteState& s, int slot, const MatX& K,
                           const HilbertLabel& new_label) {
  check_slot(slot);
  check_shape(s);
  const int d = slot_dim(s.kinds[slot]);
  if (K.rows() != d || K.cols() != d) throw InvalidArgument("apply_local: operator size");
  BipartiteState out = s;
  out.coeffs = slot == 0 ? MatX(K * s.coeffs) : MatX(s.coeffs * K.transpose());
  out.labels[slot] = new_label;
  return out;
}

BipartiteState evolve_local(const BipartiteState& s, int slot, const Worldline& wl,
                            const EMField& em, double qm, double tol) {
  check_slot(slot);
  const HilbertLabel start = label_at(wl.samples().front());
  require_same_label(s.labels[slot], start, "evolve_local");
  const HilbertLabel end = label_at(wl.samples().back());
  if (s.kinds[slot] == SlotKind::fermion)
    return apply_local(s, slot, transport_propagator(wl, em, qm, tol), end);
  if (!em.empty() && qm != 0.0)
    throw InvalidArgument("evolve_local: photons are uncharged");
  return apply_local(s, slot, photon_propagator(wl, tol), end);
}

SlotProjection project_slot(const BipartiteState& s, int slot, const MatX& P) {
  SlotProjection r;
  r.state = apply_local(s, slot, P, s.labels[slot]);
  const double n0 = bipartite_norm_squared(s);
  const double n1 = bipartite_norm_squared(r.state);
  r.probability = n1 / n0;
  if (r.probability < 1e-15) {
    r.null_branch = true;
    return r;
  }
  r.state.coeffs /= std::sqrt(n1);
  return r;
}

Mat4c polarizer_projector(const Vec4c& P) {
  const Eigen::RowVector4cd dual = -(P.adjoint() * eta().cast<cplx>());
  const double np = (dual * P)(0, 0).real();
  return P * dual / np;
}

BasisPairField transport_basis(const Worldline& wl, const EMField& em, double qm,
                               const Vec2c& phi0, const Vec2c& psi0, double tol) {
  BasisPairField f;
  f.start = label_at(wl.samples().front());
  f.end = label_at(wl.samples().back());
  f.phi0 = phi0;
  f.psi0 = psi0;
  f.propagator = transport_propagator(wl, em, qm, tol);
  f.phi = f.propagator * phi0;
  f.psi = f.propagator * psi0;
  if (orthonormality_residual(f) > 1e-9)
    throw DegenerateSetup("basis pair is not orthonormal");
  return f;
}

BasisPairField static_basis(const HilbertLabel& at) {
  BasisPairField f;
  f.start = at;
  f.end = at;
  f.phi0 = f.phi = from_rest_frame(RestFrameState{Vec2c(1, 0)}, at).psi;
  f.psi0 = f.psi = from_rest_frame(RestFrameState{Vec2c(0, 1)}, at).psi;
  return f;
}

double orthonormality_residual(const BasisPairField& f) {
  auto gram = [](const Vec2c& a, const Vec2c& b, const Vec4& u) {
    const Mat2c U = sigma_bar_dot(u);
    Mat2c g;
    g << (a.adjoint() * U * a)(0, 0), (a.adjoint() * U * b)(0, 0),
        (b.adjoint() * U * a)(0, 0), (b.adjoint() * U * b)(0, 0);
    return (g - Mat2c::Identity()).cwiseAbs().maxCoeff();
  };
  return std::max(gram(f.phi0, f.psi0, f.start.u), gram(f.phi, f.psi, f.end.u));
}

std::string to_string(BellOutcome b) {
  switch (b) {
    case BellOutcome::phi_plus: return "Phi+";
    case BellOutcome::phi_minus: return "Phi-";
    case BellOutcome::psi_plus: return "Psi+";
    case BellOutcome::psi_minus: return "Psi-";
  }
  return "?";
}

Mat2c bell_correction(BellOutcome b) {
  Mat2c m;
  switch (b) {
    case BellOutcome::phi_plus: m << 1, 0, 0, 1; break;
    case BellOutcome::phi_minus: m << 1, 0, 0, -1; break;
    case BellOutcome::psi_plus: m << 0, 1, 1, 0; break;
    case BellOutcome::psi_minus: m << 0, 1, -1, 0; break;
  }
  return m;
}

TeleportResult teleport(cplx alpha, cplx beta, const std::array<BasisPairField, 3>& fields,
                        std::optional<BellOutcome> forced, std::uint64_t seed,
                        const BasisPairField* bob_basis) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-12)
    throw InvalidArgument("teleport: need |alpha|^2 + |beta|^2 = 1");
  for (const auto& f : fields)
    if (orthonormality_residual(f) > 1e-9) throw DegenerateSetup("teleport: degenerate basis field");
  const BasisPairField& bob = bob_basis ? *bob_basis : fields[2];
  require_same_label(bob.end, fields[2].end, "teleport");

  const double r2 = 1.0 / std::sqrt(2.0);
  const auto& [f1, f2, f3] = fields;
  // T_{abc}: input on qubit 1, shared pair (phi phi + psi psi)/sqrt2 on 2,3
  const Vec2c in = alpha * f1.phi + beta * f1.psi;
  std::array<Mat2c, 2> T;  // T[a](b, c)
  const Mat2c pair = r2 * (f2.phi * f3.phi.transpose() + f2.psi * f3.psi.transpose());
  for (int a = 0; a < 2; ++a) T[a] = in(a) * pair;

  const Mat2c U1 = sigma_bar_dot(f1.end.u), U2 = sigma_bar_dot(f2.end.u),
              U3 = sigma_bar_dot(f3.end.u);
  auto bell = [&](BellOutcome o) {
    // B(a, b) on qubits 1, 2
    switch (o) {
      case BellOutcome::phi_plus: return Mat2c(r2 * (f1.phi * f2.phi.transpose() + f1.psi * f2.psi.transpose()));
      case BellOutcome::phi_minus: return Mat2c(r2 * (f1.phi * f2.phi.transpose() - f1.psi * f2.psi.transpose()));
      case BellOutcome::psi_plus: return Mat2c(r2 * (f1.phi * f2.psi.transpose() + f1.psi * f2.phi.transpose()));
      case BellOutcome::psi_minus: return Mat2c(r2 * (f1.phi * f2.psi.transpose() - f1.psi * f2.phi.transpose()));
    }
    return Mat2c::Zero().eval();
  };
  auto conditional = [&](BellOutcome o) {
    // contract the dual of B with slots 1, 2 of T
    const Mat2c Bd = (U1.transpose() * bell(o).conjugate() * U2).eval();
    Vec2c chi = Vec2c::Zero();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) chi += Bd(a, b) * T[a].row(b).transpose();
    return chi;
  };
  const std::array<BellOutcome, 4> all{BellOutcome::phi_plus, BellOutcome::phi_minus,
                                       BellOutcome::psi_plus, BellOutcome::psi_minus};
  std::array<double, 4> prob{};
  std::array<Vec2c, 4> chis;
  for (int k = 0; k < 4; ++k) {
    chis[k] = conditional(all[k]);
    prob[k] = (chis[k].adjoint() * U3 * chis[k])(0, 0).real();
  }
  int pick = 0;
  if (forced) {
    pick = static_cast<int>(*forced);
  } else {
    std::mt19937_64 rng(seed);
    double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    while (pick < 3 && r >= prob[pick]) r -= prob[pick++];
  }
  TeleportResult out;
  out.outcome = all[pick];
  out.probability = prob[pick];
  if (!(prob[pick] > 1e-15)) throw DomainError("teleport: outcome has zero probability");

  const Vec2c chi = chis[pick] / std::sqrt(prob[pick]);
  const Mat2c Ub = sigma_bar_dot(bob.end.u);
  Vec2c c((bob.phi.adjoint() * Ub * chi)(0, 0), (bob.psi.adjoint() * Ub * chi)(0, 0));
  c = bell_correction(out.outcome) * c;
  c /= c.norm();
  out.bob_coeffs = c;
  out.bob_state.at = bob.end;
  out.bob_state.psi = c(0) * bob.phi + c(1) * bob.psi;
  out.bob_state = normalized(out.bob_state);
  FermionState target{alpha * f3.phi + beta * f3.psi, f3.end};
  out.fidelity = std::norm(inner_product(target, out.bob_state)) / norm_squared(target);
  return out;
}

}  // namespace rqt
