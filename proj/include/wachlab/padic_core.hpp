#pragma once

// Exact arithmetic in O_F = W(F_{p^f}) modulo p^N, matrices over it, and the
// linear-algebra invariants (Smith form, Newton slopes, stable rank) the
// higher layers are built on.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "wachlab/errors.hpp"

namespace wachlab {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

class PrecisionContext;
using ContextPtr = std::shared_ptr<const PrecisionContext>;

/// Shared, immutable description of the coefficient ring O_F / p^N.
///
/// O_F is presented as Z_p[X]/(g(X)) with g monic of degree f and irreducible
/// mod p. The Frobenius lift sigma is fixed once per context: sigma(X) is the
/// root of g congruent to X^p mod p, Hensel-lifted to precision N.
class PrecisionContext {
 public:
  /// p odd prime, f >= 1, N >= 1, p^N < 2^62. An empty modulus selects the
  /// lexicographically first monic irreducible of degree f over F_p.
  static ContextPtr create(int p, int f, int N, std::vector<std::int64_t> modulus = {});

  int p() const noexcept { return p_; }
  int f() const noexcept { return f_; }
  int N() const noexcept { return N_; }
  u64 pN() const noexcept { return pN_; }
  /// g reduced mod p^N, coefficients low to high, length f+1.
  const std::vector<u64>& modulus() const noexcept { return modulus_; }
  const std::vector<std::int64_t>& modulus_integers() const noexcept { return modulus_int_; }

  /// The same ring at a different absolute precision (same p, f, g).
  ContextPtr with_precision(int N) const;

  bool same_ring(const PrecisionContext& other) const noexcept {
    return p_ == other.p_ && f_ == other.f_ && N_ == other.N_ && modulus_int_ == other.modulus_int_;
  }

  // Scalar kernels on residues in [0, p^N).
  u64 add(u64 a, u64 b) const noexcept {
    u64 s = a + b;
    return s >= pN_ ? s - pN_ : s;
  }
  u64 sub(u64 a, u64 b) const noexcept { return a >= b ? a - b : a + pN_ - b; }
  u64 neg(u64 a) const noexcept { return a == 0 ? 0 : pN_ - a; }
  u64 mul(u64 a, u64 b) const noexcept { return static_cast<u64>((static_cast<u128>(a) * b) % pN_); }
  u64 reduce(std::int64_t v) const noexcept;
  u64 reduce(const mpz_class& v) const;
  u64 reduce_wide(u128 v) const noexcept { return static_cast<u64>(v % pN_); }
  /// Number of products < (p^N)^2 that can be summed in 128 bits before reducing.
  std::size_t accumulate_batch() const noexcept { return batch_; }
  /// p^k mod p^N (zero once k >= N).
  u64 p_power(int k) const noexcept;
  /// v_p of a residue, N for zero.
  int valuation(u64 a) const noexcept;

  // Element kernels on f-length coefficient vectors.
  void mul_elem(const u64* a, const u64* b, u64* out) const;
  void frobenius_elem(const u64* a, u64* out) const;
  /// Reduce a length (2f-1) product modulo g into f residues (wide is clobbered).
  void reduce_poly(std::vector<u64>& wide, u64* out) const;

 private:
  PrecisionContext(int p, int f, int N, std::vector<std::int64_t> modulus);
  void compute_frobenius();

  int p_;
  int f_;
  int N_;
  u64 pN_;
  std::size_t batch_;
  std::vector<std::int64_t> modulus_int_;
  std::vector<u64> modulus_;
  // Row i holds sigma(X^i) in the power basis (f x f, row-major).
  std::vector<u64> frobenius_;
};

/// Element of O_F / p^N, stored as f residues in the power basis of X.
class OFElement {
 public:
  explicit OFElement(ContextPtr ctx);
  static OFElement from_integer(ContextPtr ctx, std::int64_t v);
  static OFElement from_mpz(ContextPtr ctx, const mpz_class& v);
  static OFElement from_coefficients(ContextPtr ctx, std::span<const std::int64_t> coeffs);
  static OFElement from_residues(ContextPtr ctx, std::span<const u64> residues);

  const ContextPtr& context() const noexcept { return ctx_; }
  std::span<const u64> coefficients() const noexcept { return coeffs_; }
  u64 coefficient(std::size_t i) const { return coeffs_.at(i); }

  bool is_zero() const noexcept;
  /// Minimum coefficient valuation; N means zero at this precision.
  int valuation() const noexcept;
  bool is_unit() const noexcept { return valuation() == 0; }

  OFElement operator+(const OFElement& o) const;
  OFElement operator-(const OFElement& o) const;
  OFElement operator*(const OFElement& o) const;
  OFElement operator-() const;
  OFElement& operator+=(const OFElement& o);
  OFElement& operator-=(const OFElement& o);
  OFElement& operator*=(const OFElement& o);
  bool operator==(const OFElement& o) const;
  bool operator!=(const OFElement& o) const { return !(*this == o); }

  OFElement pow(const mpz_class& e) const;
  /// Multiplicative inverse; NotAUnit when the residue is zero.
  OFElement inverse() const;
  /// x / p^k, known only modulo p^{N-k}: the result lives in the context of
  /// precision N-k. ExactDivisionFailure if p^k does not divide x,
  /// PrecisionLoss if N-k < 1.
  OFElement exact_divide_p_power(int k) const;
  /// Image in the context of precision n <= N.
  OFElement reduce_to(int n) const;

  std::string to_string() const;

 private:
  void check_same(const OFElement& o) const;

  ContextPtr ctx_;
  std::vector<u64> coeffs_;
};

/// sigma(x); a ring endomorphism of order f.
OFElement frobenius(const OFElement& x);
OFElement frobenius_power(const OFElement& x, int k);

/// The (p^f - 1)-th root of unity congruent to u mod p.
OFElement teichmuller(const ContextPtr& ctx, std::int64_t u);

/// Dense matrix over O_F / p^N.
class OFMatrix {
 public:
  OFMatrix(ContextPtr ctx, std::size_t rows, std::size_t cols);
  static OFMatrix identity(ContextPtr ctx, std::size_t n);
  static OFMatrix from_integers(ContextPtr ctx, const std::vector<std::vector<std::int64_t>>& rows);
  static OFMatrix diagonal(const std::vector<OFElement>& entries);

  const ContextPtr& context() const noexcept { return ctx_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  const OFElement& operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  OFElement& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

  OFMatrix operator+(const OFMatrix& o) const;
  OFMatrix operator-(const OFMatrix& o) const;
  OFMatrix operator*(const OFMatrix& o) const;
  OFMatrix operator*(const OFElement& s) const;
  bool operator==(const OFMatrix& o) const;
  bool operator!=(const OFMatrix& o) const { return !(*this == o); }

  OFMatrix transpose() const;
  OFMatrix frobenius() const;
  OFMatrix reduce_to(int n) const;
  OFMatrix submatrix(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;

  bool is_zero() const noexcept;
  /// Minimum entry valuation (N for the zero matrix).
  int valuation() const noexcept;

  /// Division-free (Berkowitz); exact modulo p^N.
  OFElement determinant() const;
  /// Monic characteristic polynomial det(T - M), coefficients low to high.
  std::vector<OFElement> characteristic_polynomial() const;
  /// Inverse of a matrix with unit determinant; NotAUnit otherwise.
  OFMatrix inverse() const;

  std::string to_string() const;

 private:
  ContextPtr ctx_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<OFElement> entries_;
};

/// U * M * V = D with U, V invertible and D diagonal, p^{e_1} | p^{e_2} | ...
struct SmithForm {
  OFMatrix U;
  OFMatrix D;
  OFMatrix V;
  /// One entry per diagonal position; nullopt means "zero at precision N".
  std::vector<std::optional<int>> exponents;
  std::size_t rank = 0;  // number of exponents known to be < N

  /// Sum of the finite exponents; PrecisionLoss when fewer than `required` are finite.
  int total_exponent(std::size_t required) const;
};

SmithForm smith_normal_form(const OFMatrix& m);

/// Slopes of the Newton polygon of the characteristic polynomial of
/// M sigma(M) ... sigma^{f-1}(M), divided by f; sorted ascending, with multiplicity.
std::vector<mpq_class> newton_slopes(const OFMatrix& m);

/// Valuations of the coefficients of a monic polynomial -> root valuations.
/// Entries equal to nullopt are "zero at precision N".
std::vector<mpq_class> newton_polygon_slopes(const std::vector<std::optional<int>>& coefficient_valuations,
                                             int precision);

/// Rank of the stabilised composite B sigma(B) ... over F_{p^f}, B = M mod p.
std::size_t semilinear_stable_rank(const OFMatrix& m);

/// Rank over F_{p^f} of M mod p.
std::size_t residue_rank(const OFMatrix& m);

using RationalMatrix = std::vector<std::vector<mpq_class>>;

std::size_t rational_rank(RationalMatrix m);
RationalMatrix rational_multiply(const RationalMatrix& a, const RationalMatrix& b);

/// ker(M - alpha) intersect im(M - alpha) = 0, tested as rank(M-a) == rank((M-a)^2).
bool is_semisimple_at(const RationalMatrix& m, const mpq_class& alpha);

/// v_p of a nonzero rational.
int rational_valuation(const mpq_class& q, int p);

std::string slope_to_string(const mpq_class& q);

}  // namespace wachlab
