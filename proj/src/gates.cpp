#include "qrtebd/gates.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "eigen_bridge.hpp"
#include "qrtebd/errors.hpp"
#include "qrtebd/linalg.hpp"

namespace qrtebd {

using detail::mat_view;
using detail::to_tensor;

namespace {

// Threaded gemm only pays off once the evolved block outgrows the caches;
// below that the fork/join latency dominates. Scoped so nested library use
// is unaffected.
class ScopedGemmThreads {
 public:
  explicit ScopedGemmThreads(std::size_t theta_elements)
#ifdef _OPENMP
      : saved_(Eigen::nbThreads()) {
    const bool big = theta_elements >= (std::size_t(1) << 19);
    Eigen::setNbThreads(big ? omp_get_max_threads() : 1);
  }
  ~ScopedGemmThreads() { Eigen::setNbThreads(saved_); }

 private:
  int saved_;
#else
  {
    (void)theta_elements;
  }
#endif
};

}  // namespace

ComplexTensor TwoSiteGate::matrix() const {
  const std::size_t d = phys_dim();
  return u.reshape({d * d, d * d});
}

TwoSiteGate make_gate(const ComplexTensor& h_bond, double dt) {
  if (h_bond.rank() != 2 || h_bond.dim(0) != h_bond.dim(1))
    throw ShapeError("bond hamiltonian must be a square matrix");
  const std::size_t d2 = h_bond.dim(0);
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(double(d2))));
  if (d * d != d2) throw ShapeError("bond hamiltonian dimension is not d^2");
  return {expm_hermitian(h_bond, dt).reshape({d, d, d, d})};
}

TwoSiteGate identity_gate(std::size_t d) {
  return {ComplexTensor::identity(d * d).reshape({d, d, d, d})};
}

TwoSiteGate gate_from_unitary(const ComplexTensor& u_matrix) {
  if (u_matrix.rank() != 2 || u_matrix.dim(0) != u_matrix.dim(1))
    throw ShapeError("gate must be a square matrix");
  const std::size_t d2 = u_matrix.dim(0);
  const auto d = static_cast<std::size_t>(std::llround(std::sqrt(double(d2))));
  if (d * d != d2) throw ShapeError("gate dimension is not d^2");
  const auto m = mat_view(u_matrix);
  const double defect =
      (m.adjoint() * m - detail::RowMat::Identity(d2, d2)).cwiseAbs().maxCoeff();
  if (defect > 1e-12) throw InputError("gate is not unitary within 1e-12");
  return {u_matrix.reshape({d, d, d, d})};
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::svd: return "svd";
    case Scheme::eig: return "eig";
    case Scheme::qr: return "qr";
    case Scheme::qr_cbe: return "qr_cbe";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "svd") return Scheme::svd;
  if (name == "eig") return Scheme::eig;
  if (name == "qr") return Scheme::qr;
  if (name == "qr_cbe") return Scheme::qr_cbe;
  throw InputError("unknown scheme: " + name);
}

std::size_t TruncationPolicy::expanded_dim(std::size_t chi, std::size_t d) const {
  const auto rel = static_cast<std::size_t>(
      std::ceil(delta_chi_rel * static_cast<double>(chi)));
  const std::size_t delta = std::max(delta_chi_abs, rel);
  std::size_t eta = std::min(d * chi, chi + delta);
  if (chi_max_expansion != 0) eta = std::min(eta, chi_max_expansion);
  return eta;
}

namespace {

// (dim0 dim1) x (dim2 dim3) matrix view of a rank-4 tensor; zero-copy since
// the storage is row-major.
Eigen::Map<const detail::RowMat> grouped(const ComplexTensor& t) {
  return {t.data().data(),
          static_cast<Eigen::Index>(t.dim(0) * t.dim(1)),
          static_cast<Eigen::Index>(t.dim(2) * t.dim(3))};
}

// Shared per-gate workspace: the evolved two-site block with and without
// the leading bond matrix. theta's buffer doubles as the grouped
// (alpha i) x (j delta) matrix.
struct ThetaParts {
  ComplexTensor phi_evolved;  // (beta, i, j, delta), gate applied, no Xi
  ComplexTensor theta;        // (alpha, i, j, delta)
  std::size_t d = 0, chi_l = 0, chi_n = 0, chi_r = 0;
  double theta_norm = 0.0;
};

ThetaParts build_theta(const ComplexTensor& xi, const ComplexTensor& b_m,
                       const ComplexTensor& b_n, const TwoSiteGate& u) {
  if (b_m.rank() != 3 || b_n.rank() != 3 || xi.rank() != 2)
    throw ShapeError("gate update expects rank-3 site tensors and a bond matrix");
  const std::size_t d = b_m.dim(0);
  if (b_n.dim(0) != d || u.phys_dim() != d)
    throw ShapeError("physical dimensions disagree");
  if (xi.dim(1) != b_m.dim(1) || b_m.dim(2) != b_n.dim(1))
    throw ShapeError("bond dimensions disagree");

  ThetaParts p;
  p.d = d;
  p.chi_l = xi.dim(0);
  p.chi_n = b_m.dim(2);
  p.chi_r = b_n.dim(2);
  const std::size_t chi_m = b_m.dim(1);
  const std::size_t chi_n = p.chi_n;
  const std::size_t chi_r = p.chi_r;

  // phi[(i j), (beta delta)] = Bm_i Bn_j, written block by block straight
  // into the grouping the gate contraction consumes; the physical slices of
  // the site tensors are contiguous
  ComplexTensor phi({d, d, chi_m, chi_r});
  {
    using detail::RowMat;
    const cplx* bm_base = b_m.data().data();
    const cplx* bn_base = b_n.data().data();
    cplx* out_base = phi.data().data();
#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static) \
    if (d * d * chi_m * chi_n * chi_r >= (std::size_t(1) << 24))
#endif
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        Eigen::Map<const RowMat> bm_i(bm_base + i * chi_m * chi_n, chi_m,
                                      chi_n);
        Eigen::Map<const RowMat> bn_j(bn_base + j * chi_n * chi_r, chi_n,
                                      chi_r);
        Eigen::Map<RowMat> out(out_base + (i * d + j) * chi_m * chi_r, chi_m,
                               chi_r);
        out.noalias() = bm_i * bn_j;
      }
  }

  // evolved[(io jo), (beta delta)] = U phi, one gemm, no permutations
  ComplexTensor evolved({d, d, chi_m, chi_r});
  Eigen::Map<detail::RowMat>(evolved.data().data(), d * d, chi_m * chi_r)
      .noalias() = grouped(u.u) * grouped(phi);
  p.phi_evolved = evolved.transpose({2, 0, 1, 3});  // (beta, io, jo, delta)

  // theta = Xi * phi_evolved over the left bond; written straight into the
  // (alpha i)(j delta) grouping
  p.theta = ComplexTensor({p.chi_l, d, d, chi_r});
  Eigen::Map<detail::RowMat>(p.theta.data().data(), p.chi_l, d * d * chi_r)
      .noalias() =
      mat_view(xi) * Eigen::Map<const detail::RowMat>(
                         p.phi_evolved.data().data(), chi_m, d * d * chi_r);
  p.theta_norm = p.theta.norm();
  return p;
}

// B~[m] via the Hastings contraction of the evolved block (without the
// leading bond matrix) against the new right isometry.
ComplexTensor hastings_left(const ComplexTensor& phi_evolved,
                            const ComplexTensor& b_n_new) {
  return contract(phi_evolved, b_n_new.conj(), {{2, 0}, {3, 2}})
      .transpose({1, 0, 2});
}

// rows (jd) of a (k x d*chi_r) matrix back into a site tensor (j, k, chi_r)
ComplexTensor right_tensor_from_rows(const ComplexTensor& rows, std::size_t d,
                                     std::size_t chi_r) {
  return rows.reshape({rows.dim(0), d, chi_r}).transpose({1, 0, 2});
}

ComplexTensor left_tensor_from_cols(const ComplexTensor& cols, std::size_t d,
                                    std::size_t chi_l) {
  return cols.reshape({chi_l, d, cols.dim(1)}).transpose({1, 0, 2});
}

ComplexTensor take_rows(const ComplexTensor& m, std::size_t k) {
  return to_tensor(mat_view(m).topRows(static_cast<Eigen::Index>(k)));
}

ComplexTensor take_grouped_rows(const ComplexTensor& t4, std::size_t k) {
  return to_tensor(grouped(t4).topRows(static_cast<Eigen::Index>(k)));
}

ComplexTensor take_cols(const ComplexTensor& m, std::size_t k) {
  return to_tensor(mat_view(m).leftCols(static_cast<Eigen::Index>(k)));
}

ComplexTensor diagonal_bond_matrix(const std::vector<double>& values,
                                   double inv_scale) {
  const std::size_t k = values.size();
  ComplexTensor xi({k, k});
  for (std::size_t i = 0; i < k; ++i) xi.at({i, i}) = values[i] * inv_scale;
  return xi;
}

/// Number of Schmidt values to keep, given values normalized to the state
/// norm and sorted descending. Ties are resolved by the stable descending
/// order: the lower index wins.
std::size_t choose_kept(const std::vector<double>& s_norm,
                        const TruncationPolicy& policy) {
  std::size_t k = 0;
  while (k < s_norm.size() && s_norm[k] >= policy.sv_cutoff) ++k;
  k = std::min<std::size_t>(k, policy.chi_max);
  if (policy.target_eps > 0.0) {
    std::vector<double> suffix(s_norm.size() + 1, 0.0);
    for (std::size_t i = s_norm.size(); i-- > 0;)
      suffix[i] = suffix[i + 1] + s_norm[i] * s_norm[i];
    std::size_t kt = 0;
    while (kt < s_norm.size() && suffix[kt] > policy.target_eps) ++kt;
    k = std::min(k, kt);
  }
  return std::max<std::size_t>(k, 1);
}

double squared_tail(const std::vector<double>& s, std::size_t from) {
  double t = 0;
  for (std::size_t i = from; i < s.size(); ++i) t += s[i] * s[i];
  return t;
}

// Shared tail of the SVD and EIG kernels: both arrive at singular values plus
// the right singular vectors (as rows) of theta.
GateUpdate finish_spectral_update(const ThetaParts& parts,
                                  const std::vector<double>& s,
                                  const ComplexTensor& vdag,
                                  std::optional<ComplexTensor> u_cols,
                                  const TruncationPolicy& policy,
                                  Scheme scheme) {
  if (parts.theta_norm <= 0.0)
    throw NumericError("evolved block has zero norm");
  std::vector<double> s_norm(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) s_norm[i] = s[i] / parts.theta_norm;
  const std::size_t kk = choose_kept(s_norm, policy);

  const std::vector<double> kept(s.begin(), s.begin() + kk);
  const double kept_norm = std::sqrt(squared_tail(kept, 0));
  const double denom = policy.skip_renormalize ? parts.theta_norm : kept_norm;

  GateUpdate out;
  out.xi_n = diagonal_bond_matrix(kept, denom > 0 ? 1.0 / denom : 0.0);
  out.b_n = right_tensor_from_rows(take_rows(vdag, kk), parts.d, parts.chi_r);
  out.b_m = hastings_left(parts.phi_evolved, out.b_n);
  if (u_cols)
    out.left_iso =
        left_tensor_from_cols(take_cols(*u_cols, kk), parts.d, parts.chi_l);

  const double total2 = parts.theta_norm * parts.theta_norm;
  out.report.chi_before = parts.chi_n;
  out.report.chi_expanded = std::min(parts.chi_l * parts.d, parts.d * parts.chi_r);
  out.report.chi_after = kk;
  out.report.discarded_weight = std::max(0.0, total2 - kept_norm * kept_norm);
  out.report.eps_trunc = out.report.discarded_weight / total2;
  out.report.scheme = scheme;
  return out;
}

struct SweepResult {
  ComplexTensor q_m;  // (chi_l d) x eta, orthonormal columns
  ComplexTensor l;    // eta x eta
  ComplexTensor q_n;  // eta x (d chi_r), orthonormal rows
};

// Alternating half-sweeps of the two-factor approximation
// theta ~= X Y: update X = theta Y0^dag, orthogonalize (QR), update
// Y = Q^dag theta, orthogonalize from the right (LQ).
SweepResult alternating_sweep(const ComplexTensor& theta, ComplexTensor y0,
                              int sweeps) {
  const auto th = grouped(theta);
  SweepResult out;
  for (int it = 0; it < std::max(1, sweeps); ++it) {
    const ComplexTensor x = to_tensor(th * mat_view(y0).adjoint());
    QrResult qr = qr_reduced(x);
    const ComplexTensor y = to_tensor(mat_view(qr.q).adjoint() * th);
    LqResult lq = lq_reduced(y);
    out.q_m = std::move(qr.q);
    out.l = std::move(lq.l);
    out.q_n = std::move(lq.q);
    y0 = out.q_n;
  }
  return out;
}

}  // namespace

GateUpdate apply_gate_svd(const ComplexTensor& xi, const ComplexTensor& b_m,
                          const ComplexTensor& b_n, const TwoSiteGate& u,
                          const TruncationPolicy& policy) {
  const ScopedGemmThreads threads(xi.dim(0) * b_m.dim(0) * b_n.dim(0) *
                                  b_n.dim(2));
  const ThetaParts parts = build_theta(xi, b_m, b_n, u);
  const SvdResult dec = svd(
      parts.theta.reshape({parts.chi_l * parts.d, parts.d * parts.chi_r}));
  return finish_spectral_update(parts, dec.s, dec.vdag, dec.u, policy,
                                Scheme::svd);
}

GateUpdate apply_gate_eig(const ComplexTensor& xi, const ComplexTensor& b_m,
                          const ComplexTensor& b_n, const TwoSiteGate& u,
                          const TruncationPolicy& policy) {
  const ScopedGemmThreads threads(xi.dim(0) * b_m.dim(0) * b_n.dim(0) *
                                  b_n.dim(2));
  const ThetaParts parts = build_theta(xi, b_m, b_n, u);
  // Gram matrix on the right leg pair; theta's SVD without forming U.
  const auto th = grouped(parts.theta);
  const ComplexTensor gram = to_tensor(th.adjoint() * th);
  const EighResult eg = eigh(gram);

  std::vector<double> s(eg.w.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = eg.w[i] > 0.0 ? std::sqrt(eg.w[i]) : 0.0;  // clip noise at zero
  const ComplexTensor vdag = to_tensor(mat_view(eg.v).adjoint());
  return finish_spectral_update(parts, s, vdag, std::nullopt, policy,
                                Scheme::eig);
}

GateUpdate apply_gate_qr(const ComplexTensor& xi, const ComplexTensor& b_m,
                         const ComplexTensor& b_n, const TwoSiteGate& u,
                         const TruncationPolicy& policy) {
  const ScopedGemmThreads threads(xi.dim(0) * b_m.dim(0) * b_n.dim(0) *
                                  b_n.dim(2));
  const ThetaParts parts = build_theta(xi, b_m, b_n, u);
  const std::size_t rows = parts.chi_l * parts.d;
  const std::size_t cols = parts.d * parts.chi_r;
  const std::size_t chi = parts.chi_n;

  // No truncation step here, so the working width must respect chi_max.
  std::size_t eta = std::min(policy.expanded_dim(chi, parts.d), policy.chi_max);
  eta = std::min({eta, rows, cols});

  // Initial guess: B[n] itself when the width is unchanged (optimal to
  // zeroth order in dt), otherwise a slice of the evolved block.
  ComplexTensor y0 =
      eta == chi ? b_n.transpose({1, 0, 2}).reshape({chi, cols})
                 : take_grouped_rows(parts.theta, eta);
  const SweepResult sw =
      alternating_sweep(parts.theta, std::move(y0), policy.qr_sweeps);

  const double l_norm = sw.l.norm();
  const double denom = policy.skip_renormalize ? parts.theta_norm : l_norm;

  GateUpdate out;
  out.xi_n = sw.l;
  out.xi_n *= denom > 0 ? 1.0 / denom : 0.0;
  out.b_n = right_tensor_from_rows(sw.q_n, parts.d, parts.chi_r);
  out.b_m = hastings_left(parts.phi_evolved, out.b_n);
  out.left_iso = left_tensor_from_cols(sw.q_m, parts.d, parts.chi_l);

  const double total2 = parts.theta_norm * parts.theta_norm;
  out.report.chi_before = chi;
  out.report.chi_expanded = eta;
  out.report.chi_after = eta;
  out.report.discarded_weight = std::max(0.0, total2 - l_norm * l_norm);
  out.report.eps_trunc =
      policy.compute_explicit_error
          ? truncation_error_explicit(parts.theta, sw.q_m, sw.l, sw.q_n)
          : out.report.discarded_weight / total2;
  out.report.scheme = Scheme::qr;
  return out;
}

GateUpdate apply_gate_qr_cbe(const ComplexTensor& xi, const ComplexTensor& b_m,
                             const ComplexTensor& b_n, const TwoSiteGate& u,
                             const TruncationPolicy& policy) {
  const ScopedGemmThreads threads(xi.dim(0) * b_m.dim(0) * b_n.dim(0) *
                                  b_n.dim(2));
  const ThetaParts parts = build_theta(xi, b_m, b_n, u);
  const std::size_t rows = parts.chi_l * parts.d;
  const std::size_t cols = parts.d * parts.chi_r;
  const std::size_t chi = parts.chi_n;

  std::size_t eta = policy.expanded_dim(chi, parts.d);
  if (eta > parts.d * chi)
    throw InputError("bond expansion beyond d*chi");
  eta = std::min({eta, rows, cols});

  const SweepResult sw = alternating_sweep(
      parts.theta, take_grouped_rows(parts.theta, eta), policy.qr_sweeps);

  // L^dag L = V S^2 V^dag: S are the Schmidt values of the projected state,
  // V's columns span the right factor. An SVD of L would give the same data.
  const ComplexTensor gram =
      to_tensor(mat_view(sw.l).adjoint() * mat_view(sw.l));
  const EighResult eg = eigh(gram);
  std::vector<double> s(eg.w.size());
  for (std::size_t i = 0; i < s.size(); ++i)
    s[i] = eg.w[i] > 0.0 ? std::sqrt(eg.w[i]) : 0.0;

  if (parts.theta_norm <= 0.0)
    throw NumericError("evolved block has zero norm");
  std::vector<double> s_norm(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) s_norm[i] = s[i] / parts.theta_norm;
  const std::size_t kk = choose_kept(s_norm, policy);

  const ComplexTensor v_kept = take_cols(eg.v, kk);  // eta x kk
  const ComplexTensor b_n_rows =
      to_tensor(mat_view(v_kept).adjoint() * mat_view(sw.q_n));

  const std::vector<double> kept(s.begin(), s.begin() + kk);
  const double kept_norm = std::sqrt(squared_tail(kept, 0));
  const double denom = policy.skip_renormalize ? parts.theta_norm : kept_norm;

  GateUpdate out;
  out.xi_n = diagonal_bond_matrix(kept, denom > 0 ? 1.0 / denom : 0.0);
  out.b_n = right_tensor_from_rows(b_n_rows, parts.d, parts.chi_r);
  out.b_m = hastings_left(parts.phi_evolved, out.b_n);

  const double total2 = parts.theta_norm * parts.theta_norm;
  out.report.chi_before = chi;
  out.report.chi_expanded = eta;
  out.report.chi_after = kk;
  out.report.discarded_weight =
      std::max(0.0, total2 - kept_norm * kept_norm);
  if (policy.compute_explicit_error) {
    const ComplexTensor center_kept = to_tensor(
        mat_view(sw.l) * (mat_view(v_kept) * mat_view(v_kept).adjoint()));
    out.report.eps_trunc =
        truncation_error_explicit(parts.theta, sw.q_m, center_kept, sw.q_n);
  } else {
    out.report.eps_trunc = out.report.discarded_weight / total2;
  }
  out.report.scheme = Scheme::qr_cbe;
  return out;
}

GateUpdate apply_gate(Scheme scheme, const ComplexTensor& xi,
                      const ComplexTensor& b_m, const ComplexTensor& b_n,
                      const TwoSiteGate& u, const TruncationPolicy& policy) {
  switch (scheme) {
    case Scheme::svd: return apply_gate_svd(xi, b_m, b_n, u, policy);
    case Scheme::eig: return apply_gate_eig(xi, b_m, b_n, u, policy);
    case Scheme::qr: return apply_gate_qr(xi, b_m, b_n, u, policy);
    case Scheme::qr_cbe: return apply_gate_qr_cbe(xi, b_m, b_n, u, policy);
  }
  throw InputError("unknown scheme");
}

double truncation_error_explicit(const ComplexTensor& theta,
                                 const ComplexTensor& left_isometry,
                                 const ComplexTensor& center,
                                 const ComplexTensor& right_isometry) {
  if (theta.rank() != 4 && theta.rank() != 2)
    throw ShapeError("truncation_error_explicit expects a matrix or a rank-4 block");
  if (left_isometry.rank() != 2 || center.rank() != 2 ||
      right_isometry.rank() != 2)
    throw ShapeError("truncation_error_explicit expects matrix factors");
  const auto t = theta.rank() == 4 ? grouped(theta) : mat_view(theta);
  if (left_isometry.dim(0) != static_cast<std::size_t>(t.rows()) ||
      left_isometry.dim(1) != center.dim(0) ||
      center.dim(1) != right_isometry.dim(0) ||
      right_isometry.dim(1) != static_cast<std::size_t>(t.cols()))
    throw ShapeError("factor shapes inconsistent with theta");

  const detail::RowMat approx =
      mat_view(left_isometry) * (mat_view(center) * mat_view(right_isometry));
  const double denom = t.squaredNorm();
  if (denom == 0.0) return 0.0;
  return (t - approx).squaredNorm() / denom;
}

namespace detail_gates {

std::vector<std::pair<BondParity, double>> layer_structure(double dt,
                                                           int order) {
  switch (order) {
    case 1:
      return {{BondParity::even, dt}, {BondParity::odd, dt}};
    case 2:
      return {{BondParity::even, 0.5 * dt},
              {BondParity::odd, dt},
              {BondParity::even, 0.5 * dt}};
    default:
      throw InputError("trotter order must be 1 or 2");
  }
}

}  // namespace detail_gates

std::vector<std::pair<BondParity, TwoSiteGate>> trotter_schedule(
    const ComplexTensor& h_bond, double dt, int order) {
  std::vector<std::pair<BondParity, TwoSiteGate>> out;
  for (const auto& [parity, dt_eff] : detail_gates::layer_structure(dt, order))
    out.emplace_back(parity, make_gate(h_bond, dt_eff));
  return out;
}

UniformStepResult tebd_step(
    const UniformMPS& state,
    const std::vector<std::pair<BondParity, TwoSiteGate>>& schedule,
    Scheme scheme, const TruncationPolicy& policy,
    const UniformGateObserver& on_gate) {
  const std::size_t L = state.cell_length();
  if (L % 2 != 0)
    throw InputError("uniform TEBD needs an even unit cell");

  UniformStepResult result{state, {}};
  UniformMPS& s = result.state;
  for (const auto& [parity, gate] : schedule) {
    if (gate.phys_dim() != s.phys_dim)
      throw ShapeError("gate physical dimension mismatch");
    const std::size_t start = parity == BondParity::even ? 0 : 1;
    for (std::size_t m = start; m < L; m += 2) {
      const std::size_t n = (m + 1) % L;
      GateUpdate upd = apply_gate(scheme, s.bond_matrices[m], s.site_tensors[m],
                                  s.site_tensors[n], gate, policy);
      s.site_tensors[m] = std::move(upd.b_m);
      s.bond_matrices[n] = std::move(upd.xi_n);
      s.site_tensors[n] = std::move(upd.b_n);
      result.reports.push_back({n, upd.report});
      if (on_gate) on_gate(s, result.reports.back());
    }
  }
  return result;
}

FiniteStepResult tebd_step(const FiniteMPS& state,
                           const std::vector<FiniteLayer>& layers,
                           Scheme scheme, const TruncationPolicy& policy,
                           const FiniteGateObserver& on_gate) {
  FiniteStepResult result{state, {}};
  FiniteMPS& s = result.state;
  const std::size_t n_sites = s.length();

  for (const FiniteLayer& layer : layers) {
    if (layer.gates.size() + 1 != n_sites)
      throw ShapeError("layer gate count must equal the bond count");
    const std::size_t start = layer.parity == BondParity::even ? 0 : 1;
    for (std::size_t m = start; m + 1 < n_sites; m += 2) {
      s = move_center(std::move(s), m);
      GateUpdate upd =
          apply_gate(scheme, s.center_matrix, s.site_tensors[m],
                     s.site_tensors[m + 1], layer.gates[m], policy);
      if (upd.left_iso) {
        s.site_tensors[m] = std::move(*upd.left_iso);
        s.center_matrix = std::move(upd.xi_n);
        s.center_bond = m + 1;
      } else {
        // Hastings-only scheme: the center matrix stays put; restore the
        // state norm lost to truncation on the updated pair.
        if (!policy.skip_renormalize && upd.report.eps_trunc > 0.0 &&
            upd.report.eps_trunc < 1.0) {
          upd.b_m *= 1.0 / std::sqrt(1.0 - upd.report.eps_trunc);
        }
        s.site_tensors[m] = std::move(upd.b_m);
      }
      s.site_tensors[m + 1] = std::move(upd.b_n);
      result.reports.push_back({m + 1, upd.report});
      if (on_gate) on_gate(s, result.reports.back());
    }
  }
  return result;
}

}  // namespace qrtebd
