#include "wachlab/filmod.hpp"

#include <algorithm>

namespace wachlab {

namespace {

OFMatrix p_power_diagonal(const ContextPtr& ctx, const std::vector<int>& exps) {
  std::vector<OFElement> diag;
  diag.reserve(exps.size());
  for (int e : exps) diag.push_back(OFElement::from_residues(ctx, [&] {
    std::vector<u64> r(static_cast<std::size_t>(ctx->f()), 0);
    r[0] = ctx->p_power(e);
    return r;
  }()));
  return OFMatrix::diagonal(diag);
}

// Basis (rows) of the saturation of the row span of g.
OFMatrix saturate(const OFMatrix& g) {
  const auto& ctx = g.context();
  if (g.rows() == 0) return OFMatrix(ctx, 0, g.cols());
  SmithForm s = smith_normal_form(g);
  OFMatrix vinv = s.V.inverse();
  return vinv.submatrix(0, 0, s.rank, g.cols());
}

// Unimodular matrix whose first rows are the saturated basis e.
OFMatrix complete_basis(const OFMatrix& e, std::size_t d) {
  const auto& ctx = e.context();
  if (e.rows() == 0) return OFMatrix::identity(ctx, d);
  SmithForm s = smith_normal_form(e);
  OFMatrix vinv = s.V.inverse();
  OFMatrix w = vinv;
  OFMatrix uinv = s.U.inverse();
  OFMatrix top = uinv * vinv.submatrix(0, 0, e.rows(), d);
  for (std::size_t i = 0; i < e.rows(); ++i)
    for (std::size_t j = 0; j < d; ++j) w(i, j) = top(i, j);
  return w;
}

OFMatrix stack(const OFMatrix& a, const OFMatrix& b) {
  OFMatrix out(a.context(), a.rows() + b.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
  for (std::size_t i = 0; i < b.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) out(a.rows() + i, j) = b(i, j);
  return out;
}

std::size_t lattice_rank(const OFMatrix& m) { return m.rows() == 0 ? 0 : smith_normal_form(m).rank; }

StrongDivisibility reject(std::string reason) {
  StrongDivisibility out;
  out.reason = std::move(reason);
  return out;
}

}  // namespace

FilPhiModule FilPhiModule::create(std::vector<int> jumps, OFMatrix A, int shift) {
  const auto& ctx = A.context();
  const int p = ctx->p();
  if (jumps.empty()) raise(ErrorKind::ValidationError, "module of rank 0");
  if (!A.is_square() || A.rows() != jumps.size())
    raise(ErrorKind::ValidationError, "matrix shape does not match the number of jumps");
  if (!std::is_sorted(jumps.begin(), jumps.end())) raise(ErrorKind::ValidationError, "jumps must be sorted ascending");
  for (int r : jumps)
    if (r < 0 || r > p - 1)
      raise(ErrorKind::ValidationError, "jump " + std::to_string(r) + " outside the window [0, " + std::to_string(p - 1) + "]");
  if (!A.determinant().is_unit()) raise(ErrorKind::ValidationError, "matrix is not invertible over O_F");
  return FilPhiModule(std::move(jumps), std::move(A), shift);
}

OFMatrix FilPhiModule::phi_matrix() const { return p_power_diagonal(context(), jumps_) * A_; }

std::vector<int> FilPhiModule::actual_jumps() const {
  std::vector<int> out = jumps_;
  for (auto& r : out) r += shift_;
  return out;
}

std::vector<int> FilPhiModule::hodge_tate_weights() const {
  std::vector<int> out = actual_jumps();
  for (auto& r : out) r = -r;
  return out;
}

RawFilPhiModule export_raw(const FilPhiModule& D, const OFMatrix& E) {
  RawFilPhiModule raw{E.frobenius().inverse() * D.phi_matrix() * E, {}};
  const auto& ctx = D.context();
  for (int i = 0; i <= D.r_max(); ++i) {
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < D.rank(); ++j)
      if (D.jumps()[j] >= i) rows.push_back(j);
    OFMatrix g(ctx, rows.size(), D.rank());
    for (std::size_t a = 0; a < rows.size(); ++a)
      for (std::size_t b = 0; b < D.rank(); ++b) g(a, b) = E(rows[a], b);
    raw.fil.push_back(g);
  }
  return raw;
}

StrongDivisibility strong_divisibility_check(const RawFilPhiModule& raw) {
  const auto& ctx = raw.Phi.context();
  const std::size_t d = raw.Phi.rows();
  if (!raw.Phi.is_square()) raise(ErrorKind::InvalidArgument, "Phi must be square");
  std::size_t levels = raw.fil.size();
  std::vector<OFMatrix> sat;
  for (const auto& g : raw.fil) sat.push_back(saturate(g));
  while (levels > 0 && sat[levels - 1].rows() == 0) --levels;
  if (levels == 0 || sat[0].rows() != d) return reject("Fil^0 is not the whole lattice");
  if (levels > static_cast<std::size_t>(ctx->p()))
    return reject("filtration length exceeds the Fontaine-Laffaille window");
  for (std::size_t i = 0; i + 1 < levels; ++i)
    if (lattice_rank(stack(sat[i], sat[i + 1])) != sat[i].rows())
      return reject("filtration is not decreasing at level " + std::to_string(i + 1));

  // Adapted basis, built from the top step down.
  OFMatrix basis(ctx, 0, d);
  std::vector<int> jumps;
  for (std::size_t level = levels; level-- > 0;) {
    const std::size_t k = basis.rows();
    const std::size_t m = sat[level].rows();
    if (m == k) continue;
    OFMatrix w = complete_basis(basis, d);
    OFMatrix y = sat[level] * w.inverse();
    OFMatrix z = saturate(y.submatrix(0, k, m, d - k));
    OFMatrix lifted(ctx, z.rows(), d);
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t j = 0; j < d - k; ++j) lifted(i, k + j) = z(i, j);
    basis = stack(basis, lifted * w);
    jumps.insert(jumps.end(), z.rows(), static_cast<int>(level));
  }
  if (basis.rows() != d) return reject("could not extract an adapted basis");
  std::reverse(jumps.begin(), jumps.end());
  OFMatrix E(ctx, d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) E(i, j) = basis(d - 1 - i, j);

  OFMatrix adapted = E.frobenius() * raw.Phi * E.inverse();
  const int r_max = jumps.back();
  if (ctx->N() - r_max < 1) raise(ErrorKind::PrecisionLoss, "precision too small for the filtration length");
  auto low = ctx->with_precision(ctx->N() - r_max);
  OFMatrix A(low, d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (adapted(i, j).valuation() < jumps[i])
        return reject("p^-" + std::to_string(jumps[i]) + " phi(Fil^" + std::to_string(jumps[i]) +
                      ") is not contained in the lattice");
      A(i, j) = adapted(i, j).exact_divide_p_power(jumps[i]).reduce_to(low->N());
    }
  if (!A.determinant().is_unit()) return reject("sum of p^-i phi(Fil^i) is a proper sublattice");
  StrongDivisibility out;
  out.strongly_divisible = true;
  out.module = FilPhiModule::create(jumps, A, 0);
  return out;
}

std::size_t unit_root_rank(const FilPhiModule& D) { return semilinear_stable_rank(D.phi_matrix()); }

bool top_slope_absent(const FilPhiModule& D) {
  std::vector<int> gaps;
  for (int r : D.jumps()) gaps.push_back(D.r_max() - r);
  return semilinear_stable_rank(D.A().inverse() * p_power_diagonal(D.context(), gaps)) == 0;
}

FilPhiModule dual_twist(const FilPhiModule& D, int k) {
  const std::size_t d = D.rank();
  const auto& ctx = D.context();
  const int r_max = D.r_max();
  std::vector<int> jumps(d);
  for (std::size_t i = 0; i < d; ++i) jumps[i] = r_max - D.jumps()[d - 1 - i];
  if (jumps.back() > ctx->p() - 1) raise(ErrorKind::WindowOverflow, "dual window exceeds p-1");
  OFMatrix inv_t = D.A().inverse().transpose();
  OFMatrix A(ctx, d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) A(i, j) = inv_t(d - 1 - i, d - 1 - j);
  return FilPhiModule::create(std::move(jumps), std::move(A), -r_max - k - D.shift());
}

HodgeInvariants hodge_invariants(const FilPhiModule& D) {
  HodgeInvariants out;
  for (int j : D.actual_jumps()) {
    ++out.h[j];
    out.t_H += j;
  }
  return out;
}

CategoryFlags category_membership(const FilPhiModule& D) {
  CategoryFlags flags;
  flags.ab_star = unit_root_rank(D) == 0;
  flags.a_star_b = top_slope_absent(D);
  flags.both = flags.ab_star && flags.a_star_b;
  return flags;
}

}  // namespace wachlab
