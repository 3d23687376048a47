#pragma once

// Truncated Q_p[Delta] (x) Q_p[[T]] with T = gamma_1 - 1, chi(gamma_1) = 1 + p.
// Elements are stored through the idempotents e_i: one polynomial in T of
// degree < M_T per i in Z/(p-1), with exact rational coefficients.

#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "wachlab/padic_core.hpp"

namespace wachlab {

class IwasawaElement {
 public:
  /// Zero; ctx must have f = 1 and M_T >= 1.
  IwasawaElement(ContextPtr ctx, std::size_t M_T);
  static IwasawaElement one(ContextPtr ctx, std::size_t M_T);
  /// The same series in every component.
  static IwasawaElement scalar_series(ContextPtr ctx, std::size_t M_T, const std::vector<mpq_class>& coeffs);

  const ContextPtr& context() const noexcept { return ctx_; }
  std::size_t truncation() const noexcept { return M_T_; }
  std::size_t num_components() const noexcept { return comps_.size(); }
  const std::vector<mpq_class>& component(std::size_t i) const { return comps_.at(i); }
  const mpq_class& coefficient(std::size_t i, std::size_t k) const { return comps_.at(i).at(k); }
  void set_coefficient(std::size_t i, std::size_t k, const mpq_class& v);

  IwasawaElement operator+(const IwasawaElement& o) const;
  IwasawaElement operator-(const IwasawaElement& o) const;
  IwasawaElement operator*(const IwasawaElement& o) const;
  IwasawaElement operator*(const mpq_class& s) const;
  bool operator==(const IwasawaElement& o) const;
  bool operator!=(const IwasawaElement& o) const { return !(*this == o); }

  /// Smallest v_p over nonzero coefficients; nullopt for zero.
  std::optional<int> min_valuation() const;
  /// All coefficients p-integral (the element lies in Lambda).
  bool is_integral() const;

 private:
  void check_compatible(const IwasawaElement& o) const;

  ContextPtr ctx_;
  std::size_t M_T_;
  std::vector<std::vector<mpq_class>> comps_;
};

IwasawaElement idempotent(const ContextPtr& ctx, std::size_t i, std::size_t M_T);

/// gamma -> chi^k(gamma) gamma: e_i -> e_{i-k}, T -> (1+p)^k (1+T) - 1.
IwasawaElement twist(const IwasawaElement& x, int k);
IwasawaElement twist1(const IwasawaElement& x);
IwasawaElement twist_inverse(const IwasawaElement& x);

/// Rational approximation of log_p(1+p), correct modulo p^{N+1}.
mpq_class log_p_one_plus_p(const ContextPtr& ctx);
/// log(1+T) / log_p(1+p) - j in every component.
IwasawaElement ell(const ContextPtr& ctx, int j, std::size_t M_T);

/// Constant term of component 0.
mpq_class eval_at_zero(const IwasawaElement& x);
/// Image under chi^k: component k mod (p-1) at T = (1+p)^k - 1.
mpq_class eval_at_character(const IwasawaElement& x, int k);

/// NotIntegral if x is not in Lambda.
bool is_lambda_unit(const IwasawaElement& x);

struct TwistConsistency {
  bool consistent = false;                // twist1(delta_V) == delta_V1
  std::vector<bool> per_idempotent;       // e_i delta_V1 == twist1(e_{i+1} delta_V)
};
TwistConsistency delta_twist_consistency(const IwasawaElement& delta_V, const IwasawaElement& delta_V1);

std::string to_string(const IwasawaElement& x);

}  // namespace wachlab
