#include "qrtebd/clock.hpp"

#include <cmath>
#include <numbers>

#include "eigen_bridge.hpp"
#include "qrtebd/errors.hpp"
#include "qrtebd/linalg.hpp"

namespace qrtebd {

using detail::ColMat;
using detail::to_eigen;
using detail::to_tensor;

namespace {

constexpr std::size_t kEdDimensionCap = 16384;  // d^n guard for the oracle

std::size_t checked_pow(std::size_t d, std::size_t n) {
  std::size_t r = 1;
  for (std::size_t k = 0; k < n; ++k) {
    if (r > kEdDimensionCap / d + 1) return kEdDimensionCap + 1;
    r *= d;
  }
  return r;
}

std::size_t ed_dimension(std::size_t d, std::size_t n_sites) {
  const std::size_t dim = checked_pow(d, n_sites);
  if (dim > kEdDimensionCap)
    throw CapacityError("exact-diagonalization oracle limited to d^n <= " +
                        std::to_string(kEdDimensionCap));
  return dim;
}

ColMat kron(const ColMat& a, const ColMat& b) {
  ColMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

void require_normalized(const std::vector<cplx>& psi) {
  double n2 = 0;
  for (const cplx& v : psi) n2 += std::norm(v);
  if (std::abs(std::sqrt(n2) - 1.0) > 1e-10)
    throw InputError("statevector not normalized");
}

}  // namespace

ClockOperators clock_operators(std::size_t d) {
  if (d < 2) throw InputError("clock model needs d >= 2");
  const double step = 2.0 * std::numbers::pi / static_cast<double>(d);
  ComplexTensor z({d, d}), x({d, d});
  for (std::size_t k = 0; k < d; ++k) {
    z.at({k, k}) = std::polar(1.0, step * static_cast<double>(k));
    x.at({k, (k + 1) % d}) = 1.0;
  }
  return {std::move(z), std::move(x)};
}

ComplexTensor bond_hamiltonian_weighted(const ClockModel& model,
                                        double left_weight,
                                        double right_weight) {
  const auto [z, x] = clock_operators(model.d);
  const ColMat zm = to_eigen(z), xm = to_eigen(x);
  const ColMat id = ColMat::Identity(model.d, model.d);
  const ColMat onsite = model.g * (xm + xm.adjoint());

  ColMat zz = kron(zm, zm.adjoint());
  ColMat h = -(zz + zz.adjoint().eval());
  h -= left_weight * kron(onsite, id);
  h -= right_weight * kron(id, onsite);
  return to_tensor(h);
}

ComplexTensor bond_hamiltonian(const ClockModel& model, BondKind kind) {
  switch (kind) {
    case BondKind::bulk:
      return bond_hamiltonian_weighted(model, 0.5, 0.5);
    case BondKind::left_edge:
      return bond_hamiltonian_weighted(model, 1.0, 0.5);
    case BondKind::right_edge:
      return bond_hamiltonian_weighted(model, 0.5, 1.0);
  }
  throw InputError("unknown bond kind");
}

ComplexTensor chain_bond_hamiltonian(const ClockModel& model, std::size_t bond,
                                     std::size_t n_sites) {
  if (n_sites < 2 || bond + 1 >= n_sites)
    throw InputError("bond index out of range");
  const double wl = bond == 0 ? 1.0 : 0.5;
  const double wr = bond + 2 == n_sites ? 1.0 : 0.5;
  return bond_hamiltonian_weighted(model, wl, wr);
}

ComplexTensor embed_one_site(const ComplexTensor& op, std::size_t site,
                             std::size_t d, std::size_t n_sites) {
  if (site >= n_sites) throw InputError("site out of range");
  const std::size_t pre = checked_pow(d, site);
  const std::size_t post = checked_pow(d, n_sites - site - 1);
  ColMat m = kron(ColMat::Identity(pre, pre),
                  kron(to_eigen(op), ColMat::Identity(post, post)));
  return to_tensor(m);
}

ComplexTensor embed_two_site(const ComplexTensor& op, std::size_t left_site,
                             std::size_t d, std::size_t n_sites) {
  if (left_site + 1 >= n_sites) throw InputError("site out of range");
  const std::size_t pre = checked_pow(d, left_site);
  const std::size_t post = checked_pow(d, n_sites - left_site - 2);
  ColMat m = kron(ColMat::Identity(pre, pre),
                  kron(to_eigen(op), ColMat::Identity(post, post)));
  return to_tensor(m);
}

ComplexTensor global_hamiltonian(const ClockModel& model, std::size_t n_sites) {
  const std::size_t dim = ed_dimension(model.d, n_sites);
  const auto [z, x] = clock_operators(model.d);
  const ColMat zm = to_eigen(z), xm = to_eigen(x);

  ColMat h = ColMat::Zero(dim, dim);
  ColMat zz = kron(zm, zm.adjoint());
  zz += zz.adjoint().eval();
  for (std::size_t n = 0; n + 1 < n_sites; ++n)
    h -= to_eigen(embed_two_site(to_tensor(zz), n, model.d, n_sites));
  const ColMat onsite = model.g * (xm + xm.adjoint());
  for (std::size_t n = 0; n < n_sites; ++n)
    h -= to_eigen(embed_one_site(to_tensor(onsite), n, model.d, n_sites));
  return to_tensor(h);
}

EdEvolver::EdEvolver(std::size_t d, std::size_t n_sites, double g)
    : d_(d), n_sites_(n_sites), dim_(ed_dimension(d, n_sites)) {
  const EighResult eg = eigh(global_hamiltonian({d, g}, n_sites));
  eigenvalues_ = eg.w;
  eigenvectors_ = eg.v;
}

std::vector<cplx> EdEvolver::evolve(const std::vector<cplx>& psi0,
                                    double t) const {
  if (psi0.size() != dim_) throw ShapeError("statevector dimension mismatch");
  const ColMat v = to_eigen(eigenvectors_);
  Eigen::Map<const Eigen::VectorXcd> p0(psi0.data(), dim_);
  Eigen::VectorXcd coeff = v.adjoint() * p0;
  for (std::size_t k = 0; k < dim_; ++k)
    coeff(k) *= std::exp(cplx(0.0, -t * eigenvalues_[k]));
  Eigen::VectorXcd out = v * coeff;
  return {out.data(), out.data() + dim_};
}

std::vector<cplx> ed_evolve(std::size_t d, std::size_t n_sites, double g,
                            const std::vector<cplx>& psi0, double t,
                            double dt_exact) {
  require_normalized(psi0);
  const EdEvolver evolver(d, n_sites, g);
  if (t == 0.0) return psi0;
  if (dt_exact <= 0.0 || dt_exact >= std::abs(t)) return evolver.evolve(psi0, t);

  const double sign = t < 0 ? -1.0 : 1.0;
  const std::size_t n_steps = static_cast<std::size_t>(std::abs(t) / dt_exact);
  std::vector<cplx> psi = psi0;
  for (std::size_t k = 0; k < n_steps; ++k)
    psi = evolver.evolve(psi, sign * dt_exact);
  const double remainder = t - sign * static_cast<double>(n_steps) * dt_exact;
  if (remainder != 0.0) psi = evolver.evolve(psi, remainder);
  return psi;
}

EdObservables ed_observables(const std::vector<cplx>& psi, std::size_t d,
                             std::size_t n_sites) {
  const std::size_t dim = ed_dimension(d, n_sites);
  if (psi.size() != dim) throw ShapeError("statevector dimension mismatch");
  require_normalized(psi);

  EdObservables out;
  const auto [z, x] = clock_operators(d);
  (void)x;

  // <Z_n> by direct summation over basis states; digit n of the basis index
  // selects the Z eigenvalue.
  out.z_per_site.assign(n_sites, cplx(0.0));
  for (std::size_t idx = 0; idx < dim; ++idx) {
    const double w = std::norm(psi[idx]);
    if (w == 0.0) continue;
    std::size_t rest = idx;
    for (std::size_t n = n_sites; n-- > 0;) {
      const std::size_t digit = rest % d;
      rest /= d;
      out.z_per_site[n] += w * z.at({digit, digit});
    }
  }

  const std::size_t left = n_sites / 2;
  const std::size_t rows = checked_pow(d, left);
  const std::size_t cols = dim / rows;
  const SvdResult dec = svd(ComplexTensor({rows, cols}, psi));
  out.schmidt_values = dec.s;
  out.half_chain_entropy = 0.0;
  for (double s : dec.s) {
    const double p = s * s;
    if (p > 0.0) out.half_chain_entropy -= p * std::log(p);
  }
  return out;
}

std::vector<cplx> ed_apply_two_site_gate(const std::vector<cplx>& psi,
                                         const ComplexTensor& gate,
                                         std::size_t site, std::size_t d,
                                         std::size_t n_sites) {
  const std::size_t dim = ed_dimension(d, n_sites);
  if (psi.size() != dim) throw ShapeError("statevector dimension mismatch");
  if (site + 1 >= n_sites) throw InputError("site out of range");

  ComplexTensor g = gate;
  if (g.rank() == 4) g = g.reshape({d * d, d * d});
  if (g.rank() != 2 || g.dim(0) != d * d || g.dim(1) != d * d)
    throw ShapeError("gate dimension mismatch");

  const std::size_t pre = checked_pow(d, site);
  const std::size_t post = dim / (pre * d * d);
  const ComplexTensor psi_t =
      ComplexTensor({pre, d * d, post}, psi);
  // out(mid', pre, post) = sum_mid G(mid', mid) psi(pre, mid, post)
  ComplexTensor out = contract(g, psi_t, {{1, 1}});
  out = out.transpose({1, 0, 2});
  return out.data();
}

}  // namespace qrtebd
