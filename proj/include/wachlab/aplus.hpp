#pragma once

// A+_F = O_F[[pi]] truncated at pi^M, with phi(pi) = (1+pi)^p - 1 and
// gamma_c(pi) = (1+pi)^c - 1.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "wachlab/padic_core.hpp"

namespace wachlab {

class APlusSeries {
 public:
  APlusSeries(ContextPtr ctx, std::size_t M);
  static APlusSeries constant(const OFElement& c, std::size_t M);
  static APlusSeries from_integers(ContextPtr ctx, std::size_t M, const std::vector<std::int64_t>& coeffs);
  static APlusSeries one(ContextPtr ctx, std::size_t M);
  /// The variable pi (zero when M <= 1).
  static APlusSeries pi(ContextPtr ctx, std::size_t M);

  const ContextPtr& context() const noexcept { return ctx_; }
  std::size_t order() const noexcept { return M_; }

  OFElement coefficient(std::size_t i) const;
  void set_coefficient(std::size_t i, const OFElement& c);
  /// Raw residues of the coefficient of pi^i (f values).
  const u64* raw(std::size_t i) const { return data_.data() + i * static_cast<std::size_t>(ctx_->f()); }
  u64* raw(std::size_t i) { return data_.data() + i * static_cast<std::size_t>(ctx_->f()); }

  bool is_zero() const noexcept;
  /// Smallest i with a nonzero coefficient, or order() if none.
  std::size_t pi_valuation() const noexcept;
  /// Minimum p-adic valuation over the coefficients (N if zero).
  int p_valuation() const noexcept;
  bool is_unit() const { return M_ > 0 && coefficient(0).is_unit(); }

  APlusSeries operator+(const APlusSeries& o) const;
  APlusSeries operator-(const APlusSeries& o) const;
  APlusSeries operator-() const;
  APlusSeries operator*(const APlusSeries& o) const;
  APlusSeries operator*(const OFElement& s) const;
  APlusSeries& operator+=(const APlusSeries& o);
  APlusSeries& operator-=(const APlusSeries& o);
  /// Equality of the common truncation.
  bool operator==(const APlusSeries& o) const;
  bool operator!=(const APlusSeries& o) const { return !(*this == o); }

  APlusSeries truncate(std::size_t M) const;
  APlusSeries pow(unsigned e) const;
  /// Coefficient-wise sigma (no substitution in pi).
  APlusSeries sigma() const;
  /// Multiply by pi^k, keeping the order.
  APlusSeries shift_up(std::size_t k) const;

  std::string to_string() const;

 private:
  APlusSeries binary_check(const APlusSeries& o) const;

  ContextPtr ctx_;
  std::size_t M_;
  std::vector<u64> data_;
};

/// Powers s_0 = 1, s_1 = s, ..., s_{count-1} of a series with zero constant
/// term, used by the substitution maps.
class SubstitutionTable {
 public:
  SubstitutionTable(const APlusSeries& image_of_pi, std::size_t count);
  /// sum_i sigma^{apply_sigma}(a_i) * image^i, truncated at the order of s.
  APlusSeries apply(const APlusSeries& s, bool apply_sigma) const;
  std::size_t order() const noexcept { return M_; }

 private:
  std::size_t M_;
  std::vector<APlusSeries> powers_;
};

/// Sum_i sigma(a_i) ((1+pi)^p - 1)^i.
APlusSeries phi_series(const APlusSeries& s);
/// (1+pi)^c - 1 as a series (c any integer prime to p).
APlusSeries gamma_pi(const ContextPtr& ctx, std::size_t M, const mpz_class& c);
/// Substitution pi -> (1+pi)^c - 1; NotAUnit if p | c.
APlusSeries gamma_series(const APlusSeries& s, const mpz_class& c);
/// q = phi(pi)/pi.
APlusSeries q_series(const ContextPtr& ctx, std::size_t M);
/// mu = p / (q - pi^{p-1}).
APlusSeries mu_series(const ContextPtr& ctx, std::size_t M);
/// s / pi^k; ExactDivisionFailure if a low coefficient is nonzero. Order drops by k.
APlusSeries exact_div_pi(const APlusSeries& s, std::size_t k);
/// Inverse of a series with unit constant term; NotAUnit otherwise.
APlusSeries invert_series(const APlusSeries& s);

}  // namespace wachlab
