#ifndef QRTEBD_GATES_HPP
#define QRTEBD_GATES_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qrtebd/mps.hpp"
#include "qrtebd/tensor.hpp"

namespace qrtebd {

/// Unitary on two adjacent sites, tensor axes (i_out, j_out, i_in, j_in).
struct TwoSiteGate {
  ComplexTensor u;

  std::size_t phys_dim() const { return u.dim(0); }
  /// d^2 x d^2 matrix view, rows (i_out j_out), cols (i_in j_in).
  ComplexTensor matrix() const;
};

/// exp(-i dt h) for a hermitian d^2 x d^2 bond hamiltonian.
TwoSiteGate make_gate(const ComplexTensor& h_bond, double dt);
TwoSiteGate identity_gate(std::size_t d);
/// Gate from an explicit d^2 x d^2 unitary (checked within 1e-12).
TwoSiteGate gate_from_unitary(const ComplexTensor& u_matrix);

enum class Scheme { svd, eig, qr, qr_cbe };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// Truncation controls shared by all update schemes.
///
/// The expanded bond dimension used by the QR schemes is
///   eta = min(d*chi, chi_max_expansion, chi + max(delta_chi_abs,
///             ceil(delta_chi_rel*chi))),
/// with chi_max_expansion = 0 meaning "no extra cap". The plain QR scheme
/// additionally clamps eta to chi_max since it has no truncation step.
struct TruncationPolicy {
  std::size_t chi_max = 1024;
  double sv_cutoff = 1e-14;     // Schmidt values below this are discarded
  double target_eps = 0.0;      // > 0: discard as much as this error budget allows
  std::size_t delta_chi_abs = 100;
  double delta_chi_rel = 0.1;
  std::size_t chi_max_expansion = 0;
  int qr_sweeps = 1;            // alternating QR/LQ sweeps; 1 suffices for near-identity gates
  bool compute_explicit_error = true;
  bool skip_renormalize = false;  // fault-injection hook used by `verify`

  std::size_t expanded_dim(std::size_t chi, std::size_t d) const;
};

struct TruncationReport {
  std::size_t chi_before = 0;
  std::size_t chi_expanded = 0;  // eta
  std::size_t chi_after = 0;     // chi tilde
  double eps_trunc = 0.0;        // relative squared-norm error of the update
  double discarded_weight = 0.0; // absolute discarded squared weight
  Scheme scheme = Scheme::svd;
};

/// Result of one two-site update: the Hastings-form right tensors plus the
/// new bond matrix. left_iso carries the left-isometric tensor (Q or the
/// left singular block) when the scheme produces one; finite-chain sweeps
/// use it to advance the orthogonality center.
struct GateUpdate {
  ComplexTensor b_m;   // (d, chi_l, chi~)
  ComplexTensor xi_n;  // chi~ x chi~, unit Frobenius norm
  ComplexTensor b_n;   // (d, chi~, chi_r)
  std::optional<ComplexTensor> left_iso;  // (d, chi_l, chi~)
  TruncationReport report;
};

GateUpdate apply_gate_svd(const ComplexTensor& xi, const ComplexTensor& b_m,
                          const ComplexTensor& b_n, const TwoSiteGate& u,
                          const TruncationPolicy& policy);
GateUpdate apply_gate_eig(const ComplexTensor& xi, const ComplexTensor& b_m,
                          const ComplexTensor& b_n, const TwoSiteGate& u,
                          const TruncationPolicy& policy);
GateUpdate apply_gate_qr(const ComplexTensor& xi, const ComplexTensor& b_m,
                         const ComplexTensor& b_n, const TwoSiteGate& u,
                         const TruncationPolicy& policy);
GateUpdate apply_gate_qr_cbe(const ComplexTensor& xi, const ComplexTensor& b_m,
                             const ComplexTensor& b_n, const TwoSiteGate& u,
                             const TruncationPolicy& policy);
GateUpdate apply_gate(Scheme scheme, const ComplexTensor& xi,
                      const ComplexTensor& b_m, const ComplexTensor& b_n,
                      const TwoSiteGate& u, const TruncationPolicy& policy);

/// || theta - left * center * right ||_F^2 / || theta ||_F^2.
/// theta may be the grouped matrix or the rank-4 (alpha, i, j, delta) tensor.
double truncation_error_explicit(const ComplexTensor& theta,
                                 const ComplexTensor& left_isometry,
                                 const ComplexTensor& center,
                                 const ComplexTensor& right_isometry);

enum class BondParity { even, odd };

/// Trotter gate sequence for a translation-invariant bond hamiltonian.
/// Order 1: even(dt), odd(dt). Order 2: even(dt/2), odd(dt), even(dt/2).
std::vector<std::pair<BondParity, TwoSiteGate>> trotter_schedule(
    const ComplexTensor& h_bond, double dt, int order);

struct BondReport {
  std::size_t bond = 0;
  TruncationReport report;
};

struct UniformStepResult {
  UniformMPS state;
  std::vector<BondReport> reports;
};

/// Observers fire after every individual gate application with the state as
/// it stands at that moment; used by the verification suites.
using UniformGateObserver =
    std::function<void(const UniformMPS&, const BondReport&)>;
using FiniteGateObserver =
    std::function<void(const FiniteMPS&, const BondReport&)>;

UniformStepResult tebd_step(const UniformMPS& state,
                            const std::vector<std::pair<BondParity, TwoSiteGate>>& schedule,
                            Scheme scheme, const TruncationPolicy& policy,
                            const UniformGateObserver& on_gate = {});

/// One Trotter layer for an open chain: gates[m] acts on sites (m, m+1)
/// and is applied when m has the layer parity.
struct FiniteLayer {
  BondParity parity;
  double dt = 0.0;
  std::vector<TwoSiteGate> gates;  // one per bond, indexed by left site
};

/// Per-bond gate layers (edge bonds may carry different hamiltonians).
template <typename BondHamFn>
std::vector<FiniteLayer> finite_trotter_layers(BondHamFn&& h_of_bond,
                                               std::size_t n_sites, double dt,
                                               int order);

struct FiniteStepResult {
  FiniteMPS state;
  std::vector<BondReport> reports;
};

FiniteStepResult tebd_step(const FiniteMPS& state,
                           const std::vector<FiniteLayer>& layers, Scheme scheme,
                           const TruncationPolicy& policy,
                           const FiniteGateObserver& on_gate = {});

// --- implementation of the template helper ---

namespace detail_gates {
std::vector<std::pair<BondParity, double>> layer_structure(double dt, int order);
}

template <typename BondHamFn>
std::vector<FiniteLayer> finite_trotter_layers(BondHamFn&& h_of_bond,
                                               std::size_t n_sites, double dt,
                                               int order) {
  std::vector<FiniteLayer> layers;
  for (const auto& [parity, dt_eff] : detail_gates::layer_structure(dt, order)) {
    FiniteLayer layer{parity, dt_eff, {}};
    layer.gates.reserve(n_sites > 0 ? n_sites - 1 : 0);
    for (std::size_t m = 0; m + 1 < n_sites; ++m)
      layer.gates.push_back(make_gate(h_of_bond(m), dt_eff));
    layers.push_back(std::move(layer));
  }
  return layers;
}

}  // namespace qrtebd

#endif
