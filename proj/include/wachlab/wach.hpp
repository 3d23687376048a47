#pragma once

// Wach-module lattice builder: from an eligible FilPhiModule, the matrices
// P (phi) and G_c (gamma_c) over A+_F with gamma_c(P) G_c = phi(G_c) P.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "wachlab/aplus.hpp"
#include "wachlab/filmod.hpp"

namespace wachlab {

/// Dense matrix of truncated series; all entries share ctx and order.
class SeriesMatrix {
 public:
  SeriesMatrix(ContextPtr ctx, std::size_t rows, std::size_t cols, std::size_t M);
  static SeriesMatrix identity(ContextPtr ctx, std::size_t n, std::size_t M);
  static SeriesMatrix constant(const OFMatrix& m, std::size_t M);

  const ContextPtr& context() const noexcept { return ctx_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t order() const noexcept { return M_; }

  const APlusSeries& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  APlusSeries& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

  SeriesMatrix operator+(const SeriesMatrix& o) const;
  SeriesMatrix operator-(const SeriesMatrix& o) const;
  SeriesMatrix operator*(const SeriesMatrix& o) const;
  SeriesMatrix operator*(const OFElement& s) const;
  bool operator==(const SeriesMatrix& o) const;
  bool operator!=(const SeriesMatrix& o) const { return !(*this == o); }

  SeriesMatrix truncate(std::size_t M) const;
  SeriesMatrix shift_up(std::size_t k) const;
  /// Entrywise map.
  template <class F>
  SeriesMatrix map(F&& fn) const {
    SeriesMatrix out(ctx_, rows_, cols_, M_);
    for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = fn(entries_[k]);
    if (!out.entries_.empty()) out.M_ = out.entries_[0].order();
    return out;
  }

  bool is_zero() const noexcept;
  /// Smallest pi-exponent with a nonzero coefficient in some entry (order() if zero).
  std::size_t pi_valuation() const noexcept;
  /// min over entries and k of v_p(coefficient of pi^k) + k; nullopt if zero.
  std::optional<std::size_t> combined_valuation() const noexcept;
  /// Constant terms.
  OFMatrix mod_pi() const;

 private:
  ContextPtr ctx_;
  std::size_t rows_;
  std::size_t cols_;
  std::size_t M_;
  std::vector<APlusSeries> entries_;
};

/// Precomputed substitution tables for phi and one gamma_c at a fixed order.
class WachTables {
 public:
  WachTables(const ContextPtr& ctx, std::size_t M, const mpz_class& c);
  APlusSeries phi(const APlusSeries& s) const { return phi_.apply(s, true); }
  APlusSeries gamma(const APlusSeries& s) const { return gamma_.apply(s, false); }
  SeriesMatrix phi(const SeriesMatrix& m) const;
  SeriesMatrix gamma(const SeriesMatrix& m) const;
  const mpz_class& c() const noexcept { return c_; }
  std::size_t order() const noexcept { return M_; }

 private:
  std::size_t M_;
  mpz_class c_;
  SubstitutionTable phi_;
  SubstitutionTable gamma_;
};

struct WachOptions {
  std::size_t M = 0;  // pi-truncation of the results; 0 selects 40(p-1)
  /// Starting point of the fixed-point iteration (zero if unset).
  std::optional<std::uint64_t> start_seed;
};

struct WachData {
  FilPhiModule D;
  mpz_class c;
  std::size_t M = 0;
  SeriesMatrix P;
  SeriesMatrix Q;
  SeriesMatrix H;
  SeriesMatrix G;
  /// pi-valuation of gamma(P) G - phi(G) P; equals M when it vanishes at truncation.
  std::size_t residual_valuation = 0;
  std::size_t iterations = 0;
};

/// Diag((q mu)^{r_i}) A at order M.
SeriesMatrix build_P(const FilPhiModule& D, std::size_t M);
/// (gamma_c(P^{-1}) P - Id) / pi^{p-1} at order M (computed at M + p - 1).
/// CongruenceFailure if the low coefficients do not vanish.
SeriesMatrix compute_Q(const FilPhiModule& D, const mpz_class& c, std::size_t M);
/// q^{p-1} gamma_c(P^{-1}), integral.
SeriesMatrix gamma_P_inverse_scaled(const FilPhiModule& D, const WachTables& t);
/// Fixed point of H = Q + q^{p-1} gamma(P^{-1}) phi(H) P; NonConvergence if the
/// iteration stalls for d f N steps.
SeriesMatrix solve_H(const FilPhiModule& D, const mpz_class& c, const WachOptions& opts = {},
                     std::size_t* iterations = nullptr);
WachData gamma_matrix(const FilPhiModule& D, const mpz_class& c, const WachOptions& opts = {});

/// gamma_c(P) G - phi(G) P.
SeriesMatrix relation_residual(const WachData& W);
/// G_{c1 c2} == gamma_{c2}(G_{c1}) G_{c2} (and the symmetric form).
bool check_cocycle(const FilPhiModule& D, const mpz_class& c1, const mpz_class& c2, const WachOptions& opts = {});
/// q^{r_d} P^{-1} has entries in A+.
bool check_q_cokernel(const WachData& W);

struct TiResult {
  SeriesMatrix matrix;
  OFElement scalar;  // the reduction mod pi, a multiple of Id
  int scalar_valuation = 0;
};
/// Matrix of T_i(gamma) = prod_{k=1}^{i-1} (1 - c^{-k} gamma) on N.
TiResult apply_Ti(const WachData& W, int i);

}  // namespace wachlab
