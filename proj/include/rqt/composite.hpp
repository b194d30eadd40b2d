#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include "rqt/photon.hpp"

namespace rqt {

enum class SlotKind { fermion, photon };

int slot_dim(SlotKind k);

// psi_{A1 A2} (fermion), psi^{I1 I2} (photon) or mixed; rows belong to slot 0
struct BipartiteState {
  std::array<SlotKind, 2> kinds{SlotKind::fermion, SlotKind::fermion};
  Eigen::MatrixXcd coeffs = Eigen::MatrixXcd::Zero(2, 2);
  std::array<HilbertLabel, 2> labels{};
};

BipartiteState product_state(const FermionState& a, const FermionState& b);
BipartiteState product_state(const PhotonState& a, const PhotonState& b);
BipartiteState product_state(const PhotonState& a, const FermionState& b);
// (up down - down up)/sqrt2 in rest-frame components, both slots at rest
BipartiteState singlet(const Event& x1, const Event& x2);

// Gram matrix of the slot inner product: u_I sbar^I or -eta
Eigen::MatrixXcd slot_gram(SlotKind k, const HilbertLabel& at);

// tr(a^dagger G1 b G2^T); labels must agree slot by slot
cplx bipartite_inner_product(const BipartiteState& a, const BipartiteState& b);
double bipartite_norm_squared(const BipartiteState& s);
// largest |u_I psi^{..I..}| over photon slots
double transversality_residual(const BipartiteState& s);

// Apply a linear map on one slot and relabel it.
BipartiteState apply_local(const BipartiteState& s, int slot, const Eigen::MatrixXcd& K,
                           const HilbertLabel& new_label);

// Transport one slot along wl (fermion: spin transport with em, q/m; photon:
// parallel transport of the polarisation). wl must start at the slot label.
BipartiteState evolve_local(const BipartiteState& s, int slot, const Worldline& wl,
                            const EMField& em, double charge_to_mass, double tol);

struct SlotProjection {
  double probability = 0.0;
  bool null_branch = false;  // probability below 1e-15; state left unnormalised
  BipartiteState state;
};
// Luders update with a projector acting on one slot.
SlotProjection project_slot(const BipartiteState& s, int slot, const Eigen::MatrixXcd& P);

// psi -> P <P|psi> / <P|P> on a photon slot
Mat4c polarizer_projector(const Vec4c& P);

// Orthonormal pair (phi, psi) carried along one trajectory by spin transport.
struct BasisPairField {
  HilbertLabel start;
  HilbertLabel end;
  Vec2c phi0 = Vec2c(1, 0), psi0 = Vec2c(0, 1);
  Vec2c phi = Vec2c(1, 0), psi = Vec2c(0, 1);
  Mat2c propagator = Mat2c::Identity();
};

BasisPairField transport_basis(const Worldline& wl, const EMField& em, double charge_to_mass,
                               const Vec2c& phi0, const Vec2c& psi0, double tol);
// Rest-frame basis lifted at the label, no transport
BasisPairField static_basis(const HilbertLabel& at);
// largest deviation from orthonormality at start and end
double orthonormality_residual(const BasisPairField& f);

enum class BellOutcome { phi_plus, phi_minus, psi_plus, psi_minus };
std::string to_string(BellOutcome b);

// Correction applied to Bob's coefficients in his basis
Mat2c bell_correction(BellOutcome b);

struct TeleportResult {
  BellOutcome outcome = BellOutcome::phi_plus;
  double probability = 0.0;
  FermionState bob_state;  // normalised, at the end of trajectory 3
  Vec2c bob_coeffs;        // after correction, in the basis Bob uses
  double fidelity = 0.0;   // against alpha phi3 + beta psi3
};

// fields[0]: Alice's input qubit, fields[1]: Alice's half of the pair,
// fields[2]: Bob's half. bob_basis overrides the basis Bob reads and corrects
// in (defaults to fields[2]).
TeleportResult teleport(cplx alpha, cplx beta, const std::array<BasisPairField, 3>& fields,
                        std::optional<BellOutcome> forced, std::uint64_t seed,
                        const BasisPairField* bob_basis = nullptr);

}  // namespace rqt
