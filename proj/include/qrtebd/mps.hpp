#ifndef QRTEBD_MPS_HPP
#define QRTEBD_MPS_HPP

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "qrtebd/tensor.hpp"

namespace qrtebd {

/// Translation-invariant infinite MPS over a unit cell of L sites.
/// site_tensors[m] has axes (physical, left bond, right bond) and is kept
/// right-isometric; bond_matrices[m] is the bond matrix Xi on the bond to
/// the LEFT of site m, with unit Frobenius norm. States are treated as
/// immutable snapshots: every operation returns a new value.
struct UniformMPS {
  std::size_t phys_dim = 0;
  std::vector<ComplexTensor> site_tensors;
  std::vector<ComplexTensor> bond_matrices;

  std::size_t cell_length() const { return site_tensors.size(); }
  /// Dimension of the bond left of site m.
  std::size_t bond_dim(std::size_t m) const { return bond_matrices[m].dim(0); }
};

/// Open-chain MPS with an explicit orthogonality-center bond: tensors on
/// sites < center_bond are left-isometric, sites >= center_bond are
/// right-isometric, and the bond matrix on the center bond has unit norm.
struct FiniteMPS {
  std::size_t phys_dim = 0;
  std::vector<ComplexTensor> site_tensors;
  std::size_t center_bond = 0;
  ComplexTensor center_matrix;

  std::size_t length() const { return site_tensors.size(); }
};

struct IsometryReport {
  std::vector<double> right_defects;        // per site: || sum_i B B^dag - 1 ||_max
  std::vector<double> left_defects;         // finite: left-isometry per site;
                                            // uniform: cell fixed-point per bond
  std::vector<double> translation_defects;  // uniform only: lambda T = lambda'
  std::vector<double> norm_defects;         // per bond: | ||Xi|| - 1 |
  double max_right_defect = 0.0;
  double max_left_defect = 0.0;
  double max_translation_defect = 0.0;
  double max_norm_defect = 0.0;
  bool pass = false;

  double max_defect() const;
};

UniformMPS product_state_uniform(std::size_t d, std::size_t cell_length,
                                 const std::vector<cplx>& local_vector);
FiniteMPS product_state_finite(std::size_t d, std::size_t n_sites,
                               const std::vector<cplx>& local_vector);

IsometryReport check_isometric(const UniformMPS& mps, double tol);
IsometryReport check_isometric(const FiniteMPS& mps, double tol);

cplx expectation_local(const UniformMPS& mps, const ComplexTensor& op,
                       std::size_t site);
cplx expectation_local(const FiniteMPS& mps, const ComplexTensor& op,
                       std::size_t site);

/// Singular values of the bond matrix on `bond`, descending.
std::vector<double> schmidt_values(const UniformMPS& mps, std::size_t bond);
std::vector<double> schmidt_values(const FiniteMPS& mps, std::size_t bond);

double entropy_from_schmidt(const std::vector<double>& values);
double entanglement_entropy(const UniformMPS& mps, std::size_t bond);
double entanglement_entropy(const FiniteMPS& mps, std::size_t bond);

/// Re-gauge the chain so the orthogonality center sits on `new_center`;
/// the represented state is unchanged.
FiniteMPS move_center(FiniteMPS mps, std::size_t new_center);

// Checkpoint container: little-endian binary, header (magic, version, kind,
// length, d, center bond, bond dimensions), then the bond/center matrices
// and site tensors as row-major complex doubles.
void save_mps(const UniformMPS& mps, const std::string& path);
void save_mps(const FiniteMPS& mps, const std::string& path);
std::variant<UniformMPS, FiniteMPS> load_mps(const std::string& path);

}  // namespace qrtebd

#endif
