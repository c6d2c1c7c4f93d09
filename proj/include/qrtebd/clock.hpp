#ifndef QRTEBD_CLOCK_HPP
#define QRTEBD_CLOCK_HPP

#include <cstddef>
#include <vector>

#include "qrtebd/tensor.hpp"

namespace qrtebd {

/// d-state quantum clock model with transverse coupling g.
/// H = -sum_n (Z_n Z_{n+1}^dag + h.c.) - g sum_n (X_n + X_n^dag),
/// Z = diag(1, w, ..., w^{d-1}), X the cyclic shift, w = exp(2 pi i / d).
struct ClockModel {
  std::size_t d = 2;
  double g = 0.0;
};

struct ClockOperators {
  ComplexTensor z;  // d x d, unitary diagonal
  ComplexTensor x;  // d x d, cyclic shift
};

ClockOperators clock_operators(std::size_t d);

/// Placement of a bond inside an open chain; decides how much of the onsite
/// term each bond carries (half in the bulk, full weight at an open edge).
enum class BondKind { bulk, left_edge, right_edge };

ComplexTensor bond_hamiltonian(const ClockModel& model, BondKind kind);

/// General weights for the left/right onsite terms; the named kinds map to
/// (1, 1/2), (1/2, 1/2) and (1/2, 1). A two-site chain needs (1, 1).
ComplexTensor bond_hamiltonian_weighted(const ClockModel& model, double left_weight,
                                        double right_weight);

/// Bond hamiltonian for bond m of an open n_sites chain, edge weights applied.
ComplexTensor chain_bond_hamiltonian(const ClockModel& model, std::size_t bond,
                                     std::size_t n_sites);

/// Full H of an open chain as a dense d^n x d^n matrix, assembled directly
/// from the global formula (independent of the bond decomposition).
ComplexTensor global_hamiltonian(const ClockModel& model, std::size_t n_sites);

/// Embeddings into the full chain Hilbert space, site 0 most significant.
ComplexTensor embed_one_site(const ComplexTensor& op, std::size_t site,
                             std::size_t d, std::size_t n_sites);
ComplexTensor embed_two_site(const ComplexTensor& op, std::size_t left_site,
                             std::size_t d, std::size_t n_sites);

// --- exact-diagonalization oracle (desk scale, d^n <= 16384) ---

/// Spectral propagator for the full chain Hamiltonian; diagonalizes once,
/// then evolves statevectors for arbitrary times.
class EdEvolver {
 public:
  EdEvolver(std::size_t d, std::size_t n_sites, double g);

  std::vector<cplx> evolve(const std::vector<cplx>& psi0, double t) const;

  std::size_t dimension() const { return dim_; }

 private:
  std::size_t d_, n_sites_, dim_;
  std::vector<double> eigenvalues_;
  ComplexTensor eigenvectors_;
};

/// One-shot evolution by exp(-i H t). When 0 < dt_exact < t the propagation
/// is carried out in steps of dt_exact through the same spectral propagator
/// (the results agree to rounding; the step form mirrors how trajectories
/// are sampled).
std::vector<cplx> ed_evolve(std::size_t d, std::size_t n_sites, double g,
                            const std::vector<cplx>& psi0, double t,
                            double dt_exact);

struct EdObservables {
  std::vector<cplx> z_per_site;
  double half_chain_entropy = 0.0;
  std::vector<double> schmidt_values;
};

EdObservables ed_observables(const std::vector<cplx>& psi, std::size_t d,
                             std::size_t n_sites);

/// Apply a two-site gate (given as its d^2 x d^2 matrix or (d,d,d,d) tensor)
/// to sites (site, site+1) of a statevector. Gate-matched oracle for the
/// MPS update kernels.
std::vector<cplx> ed_apply_two_site_gate(const std::vector<cplx>& psi,
                                         const ComplexTensor& gate,
                                         std::size_t site, std::size_t d,
                                         std::size_t n_sites);

}  // namespace qrtebd

#endif
