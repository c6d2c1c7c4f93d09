#include "qrtebd/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "qrtebd/errors.hpp"
#include "qrtebd/linalg.hpp"

namespace qrtebd {

namespace {

double max_abs(const ComplexTensor& t) {
  double m = 0;
  for (const cplx& v : t.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_minus_identity(const ComplexTensor& t) {
  const std::size_t n = t.dim(0);
  double m = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const cplx v = t.at({i, j}) - (i == j ? cplx(1.0) : cplx(0.0));
      m = std::max(m, std::abs(v));
    }
  return m;
}

// sum_i B^i B^i-dag - 1 (right-isometry defect matrix source)
double right_defect(const ComplexTensor& b) {
  return max_abs_minus_identity(contract(b, b.conj(), {{0, 0}, {2, 2}}));
}

// sum_i B^i-dag B^i - 1
double left_defect(const ComplexTensor& b) {
  return max_abs_minus_identity(contract(b.conj(), b, {{0, 0}, {1, 1}}));
}

// lambda_{aa'} = sum_b Xi_{ba} conj(Xi)_{ba'}
ComplexTensor left_weight(const ComplexTensor& xi) {
  return contract(xi, xi.conj(), {{0, 0}});
}

// one-site transfer applied to a left weight:
// out_{bb'} = sum_{aa'i} lambda_{aa'} B^i_{ab} conj(B^i)_{a'b'}
ComplexTensor translate_left_weight(const ComplexTensor& lambda,
                                    const ComplexTensor& b) {
  const ComplexTensor t1 = contract(lambda, b, {{0, 1}});  // (a', i, b)
  return contract(t1, b.conj(), {{0, 1}, {1, 0}});         // (b, b')
}

ComplexTensor difference(const ComplexTensor& a, const ComplexTensor& b) {
  ComplexTensor out = a;
  for (std::size_t k = 0; k < out.data().size(); ++k)
    out.data()[k] -= b.data()[k];
  return out;
}

std::vector<cplx> normalized_local_vector(std::size_t d,
                                          const std::vector<cplx>& v) {
  if (v.size() != d) throw ShapeError("local vector length must equal d");
  double n2 = 0;
  for (const cplx& a : v) n2 += std::norm(a);
  if (n2 <= 0.0) throw InputError("local vector has zero norm");
  std::vector<cplx> out = v;
  const double inv = 1.0 / std::sqrt(n2);
  for (cplx& a : out) a *= inv;
  return out;
}

}  // namespace

double IsometryReport::max_defect() const {
  return std::max(std::max(max_right_defect, max_left_defect),
                  std::max(max_translation_defect, max_norm_defect));
}

UniformMPS product_state_uniform(std::size_t d, std::size_t cell_length,
                                 const std::vector<cplx>& local_vector) {
  if (cell_length == 0) throw InputError("cell length must be positive");
  const std::vector<cplx> v = normalized_local_vector(d, local_vector);
  UniformMPS mps;
  mps.phys_dim = d;
  mps.site_tensors.assign(cell_length, ComplexTensor({d, 1, 1}, v));
  mps.bond_matrices.assign(cell_length, ComplexTensor::identity(1));
  return mps;
}

FiniteMPS product_state_finite(std::size_t d, std::size_t n_sites,
                               const std::vector<cplx>& local_vector) {
  if (n_sites == 0) throw InputError("chain length must be positive");
  const std::vector<cplx> v = normalized_local_vector(d, local_vector);
  FiniteMPS mps;
  mps.phys_dim = d;
  mps.site_tensors.assign(n_sites, ComplexTensor({d, 1, 1}, v));
  mps.center_bond = 0;
  mps.center_matrix = ComplexTensor::identity(1);
  return mps;
}

IsometryReport check_isometric(const UniformMPS& mps, double tol) {
  const std::size_t L = mps.cell_length();
  IsometryReport rep;
  rep.right_defects.resize(L);
  rep.translation_defects.resize(L);
  rep.left_defects.resize(L);
  rep.norm_defects.resize(L);

  std::vector<ComplexTensor> lambdas(L);
  for (std::size_t m = 0; m < L; ++m) {
    rep.right_defects[m] = right_defect(mps.site_tensors[m]);
    lambdas[m] = left_weight(mps.bond_matrices[m]);
    double n = mps.bond_matrices[m].norm();
    rep.norm_defects[m] = std::abs(n - 1.0);
  }
  for (std::size_t m = 0; m < L; ++m) {
    const ComplexTensor moved =
        translate_left_weight(lambdas[m], mps.site_tensors[m]);
    rep.translation_defects[m] = max_abs(difference(moved, lambdas[(m + 1) % L]));

    ComplexTensor cell = lambdas[m];
    for (std::size_t k = 0; k < L; ++k)
      cell = translate_left_weight(cell, mps.site_tensors[(m + k) % L]);
    rep.left_defects[m] = max_abs(difference(cell, lambdas[m]));
  }

  rep.max_right_defect =
      *std::max_element(rep.right_defects.begin(), rep.right_defects.end());
  rep.max_translation_defect = *std::max_element(
      rep.translation_defects.begin(), rep.translation_defects.end());
  rep.max_left_defect =
      *std::max_element(rep.left_defects.begin(), rep.left_defects.end());
  rep.max_norm_defect =
      *std::max_element(rep.norm_defects.begin(), rep.norm_defects.end());
  rep.pass = rep.max_defect() <= tol;
  return rep;
}

IsometryReport check_isometric(const FiniteMPS& mps, double tol) {
  const std::size_t n = mps.length();
  IsometryReport rep;
  rep.right_defects.assign(n, 0.0);
  rep.left_defects.assign(n, 0.0);
  rep.norm_defects.assign(1, std::abs(mps.center_matrix.norm() - 1.0));

  for (std::size_t s = 0; s < n; ++s) {
    if (s < mps.center_bond)
      rep.left_defects[s] = left_defect(mps.site_tensors[s]);
    else
      rep.right_defects[s] = right_defect(mps.site_tensors[s]);
  }
  rep.max_right_defect =
      *std::max_element(rep.right_defects.begin(), rep.right_defects.end());
  rep.max_left_defect =
      *std::max_element(rep.left_defects.begin(), rep.left_defects.end());
  rep.max_translation_defect = 0.0;
  rep.max_norm_defect = rep.norm_defects[0];
  rep.pass = rep.max_defect() <= tol;
  return rep;
}

namespace {

cplx expectation_from_weight(const ComplexTensor& lambda, const ComplexTensor& b,
                             const ComplexTensor& op) {
  // t2_{i i'} = sum_{a a' b} lambda_{a a'} B^i_{a b} conj(B^i')_{a' b}
  const ComplexTensor t1 = contract(lambda, b, {{0, 1}});      // (a', i, b)
  const ComplexTensor t2 = contract(t1, b.conj(), {{0, 1}, {2, 2}});  // (i, i')
  const ComplexTensor val = contract(op, t2, {{0, 1}, {1, 0}});
  return val.data()[0];
}

}  // namespace

cplx expectation_local(const UniformMPS& mps, const ComplexTensor& op,
                       std::size_t site) {
  if (op.rank() != 2 || op.dim(0) != mps.phys_dim || op.dim(1) != mps.phys_dim)
    throw ShapeError("operator must be d x d");
  if (site >= mps.cell_length()) throw InputError("site out of range");
  const ComplexTensor lambda = left_weight(mps.bond_matrices[site]);
  return expectation_from_weight(lambda, mps.site_tensors[site], op);
}

cplx expectation_local(const FiniteMPS& mps, const ComplexTensor& op,
                       std::size_t site) {
  if (op.rank() != 2 || op.dim(0) != mps.phys_dim || op.dim(1) != mps.phys_dim)
    throw ShapeError("operator must be d x d");
  if (site >= mps.length()) throw InputError("site out of range");
  const FiniteMPS centered = move_center(mps, site);
  const ComplexTensor lambda = left_weight(centered.center_matrix);
  return expectation_from_weight(lambda, centered.site_tensors[site], op);
}

std::vector<double> schmidt_values(const UniformMPS& mps, std::size_t bond) {
  if (bond >= mps.cell_length()) throw InputError("bond out of range");
  return svd(mps.bond_matrices[bond]).s;
}

std::vector<double> schmidt_values(const FiniteMPS& mps, std::size_t bond) {
  if (bond > mps.length()) throw InputError("bond out of range");
  const FiniteMPS centered = move_center(mps, bond);
  return svd(centered.center_matrix).s;
}

double entropy_from_schmidt(const std::vector<double>& values) {
  double s = 0;
  for (double v : values) {
    const double p = v * v;
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double entanglement_entropy(const UniformMPS& mps, std::size_t bond) {
  return entropy_from_schmidt(schmidt_values(mps, bond));
}

double entanglement_entropy(const FiniteMPS& mps, std::size_t bond) {
  return entropy_from_schmidt(schmidt_values(mps, bond));
}

FiniteMPS move_center(FiniteMPS mps, std::size_t new_center) {
  if (new_center > mps.length()) throw InputError("center bond out of range");
  const std::size_t d = mps.phys_dim;

  while (mps.center_bond < new_center) {
    const std::size_t c = mps.center_bond;
    // absorb the center matrix into site c and split off a left isometry
    const ComplexTensor m = contract(mps.center_matrix, mps.site_tensors[c],
                                     {{1, 1}});  // (a, i, b)
    const std::size_t chi_l = m.dim(0), chi_r = m.dim(2);
    const QrResult qr = qr_reduced(m.reshape({chi_l * d, chi_r}));
    const std::size_t k = qr.q.dim(1);
    mps.site_tensors[c] =
        qr.q.reshape({chi_l, d, k}).transpose({1, 0, 2});
    mps.center_matrix = qr.r;
    mps.center_bond = c + 1;
  }
  while (mps.center_bond > new_center) {
    const std::size_t c = mps.center_bond;
    const ComplexTensor m = contract(mps.site_tensors[c - 1], mps.center_matrix,
                                     {{2, 0}});  // (i, a, g)
    const std::size_t chi_l = m.dim(1), chi_r = m.dim(2);
    const LqResult lq =
        lq_reduced(m.transpose({1, 0, 2}).reshape({chi_l, d * chi_r}));
    const std::size_t k = lq.q.dim(0);
    mps.site_tensors[c - 1] =
        lq.q.reshape({k, d, chi_r}).transpose({1, 0, 2});
    mps.center_matrix = lq.l;
    mps.center_bond = c - 1;
  }
  return mps;
}

// --- checkpoint serialization ---

namespace {

constexpr char kMagic[8] = {'Q', 'R', 'T', 'E', 'B', 'D', 'M', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw InputError("truncated checkpoint file");
  return v;
}

void write_tensor_data(std::ofstream& os, const ComplexTensor& t) {
  os.write(reinterpret_cast<const char*>(t.data().data()),
           static_cast<std::streamsize>(t.size() * sizeof(cplx)));
}

void read_tensor_data(std::ifstream& is, ComplexTensor& t) {
  is.read(reinterpret_cast<char*>(t.data().data()),
          static_cast<std::streamsize>(t.size() * sizeof(cplx)));
  if (!is) throw InputError("truncated checkpoint file");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw InputError("cannot write checkpoint: " + path);
  return os;
}

void write_header(std::ofstream& os, std::uint8_t kind, std::uint32_t length,
                  std::uint32_t d, std::uint32_t center,
                  const std::vector<std::uint64_t>& bond_dims) {
  os.write(kMagic, sizeof(kMagic));
  write_pod(os, kVersion);
  write_pod(os, kind);
  write_pod(os, length);
  write_pod(os, d);
  write_pod(os, center);
  for (std::uint64_t b : bond_dims) write_pod(os, b);
}

}  // namespace

void save_mps(const UniformMPS& mps, const std::string& path) {
  std::ofstream os = open_out(path);
  const std::size_t L = mps.cell_length();
  std::vector<std::uint64_t> bonds(L);
  for (std::size_t m = 0; m < L; ++m) bonds[m] = mps.bond_dim(m);
  write_header(os, 0, static_cast<std::uint32_t>(L),
               static_cast<std::uint32_t>(mps.phys_dim), 0, bonds);
  for (std::size_t m = 0; m < L; ++m) {
    write_tensor_data(os, mps.bond_matrices[m]);
    write_tensor_data(os, mps.site_tensors[m]);
  }
  if (!os) throw InputError("write failed: " + path);
}

void save_mps(const FiniteMPS& mps, const std::string& path) {
  std::ofstream os = open_out(path);
  const std::size_t n = mps.length();
  std::vector<std::uint64_t> bonds(n + 1);
  for (std::size_t m = 0; m < n; ++m) bonds[m] = mps.site_tensors[m].dim(1);
  bonds[n] = mps.site_tensors[n - 1].dim(2);
  write_header(os, 1, static_cast<std::uint32_t>(n),
               static_cast<std::uint32_t>(mps.phys_dim),
               static_cast<std::uint32_t>(mps.center_bond), bonds);
  // the center matrix may be rectangular after a rank-revealing gauge move
  write_pod(os, static_cast<std::uint64_t>(mps.center_matrix.dim(0)));
  write_pod(os, static_cast<std::uint64_t>(mps.center_matrix.dim(1)));
  write_tensor_data(os, mps.center_matrix);
  for (std::size_t m = 0; m < n; ++m) write_tensor_data(os, mps.site_tensors[m]);
  if (!os) throw InputError("write failed: " + path);
}

std::variant<UniformMPS, FiniteMPS> load_mps(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot read checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw InputError("not a checkpoint file: " + path);
  if (read_pod<std::uint32_t>(is) != kVersion)
    throw InputError("unsupported checkpoint version");

  const auto kind = read_pod<std::uint8_t>(is);
  const auto length = read_pod<std::uint32_t>(is);
  const auto d = read_pod<std::uint32_t>(is);
  const auto center = read_pod<std::uint32_t>(is);
  if (length == 0 || d == 0) throw InputError("corrupt checkpoint header");

  if (kind == 0) {
    std::vector<std::uint64_t> bonds(length);
    for (auto& b : bonds) b = read_pod<std::uint64_t>(is);
    UniformMPS mps;
    mps.phys_dim = d;
    for (std::size_t m = 0; m < length; ++m) {
      const std::size_t bl = bonds[m], br = bonds[(m + 1) % length];
      ComplexTensor xi({bl, bl});
      read_tensor_data(is, xi);
      ComplexTensor b({d, bl, br});
      read_tensor_data(is, b);
      mps.bond_matrices.push_back(std::move(xi));
      mps.site_tensors.push_back(std::move(b));
    }
    return mps;
  }
  if (kind == 1) {
    std::vector<std::uint64_t> bonds(length + 1);
    for (auto& b : bonds) b = read_pod<std::uint64_t>(is);
    if (center > length) throw InputError("corrupt checkpoint header");
    FiniteMPS mps;
    mps.phys_dim = d;
    mps.center_bond = center;
    const auto c_rows = read_pod<std::uint64_t>(is);
    const auto c_cols = read_pod<std::uint64_t>(is);
    mps.center_matrix = ComplexTensor({c_rows, c_cols});
    read_tensor_data(is, mps.center_matrix);
    for (std::size_t m = 0; m < length; ++m) {
      ComplexTensor b({d, bonds[m], bonds[m + 1]});
      read_tensor_data(is, b);
      mps.site_tensors.push_back(std::move(b));
    }
    return mps;
  }
  throw InputError("unknown checkpoint kind");
}

}  // namespace qrtebd
