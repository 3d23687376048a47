#include "wachlab/iwasawa.hpp"

#include <sstream>

namespace wachlab {

namespace {

int vp(const mpq_class& q, int p) {
  mpz_class num = q.get_num(), den = q.get_den();
  int v = 0;
  while (mpz_divisible_ui_p(num.get_mpz_t(), static_cast<unsigned long>(p))) num /= p, ++v;
  while (mpz_divisible_ui_p(den.get_mpz_t(), static_cast<unsigned long>(p))) den /= p, --v;
  return v;
}

std::size_t wrap(long i, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((i % m) + m) % m);
}

mpq_class evaluate(const std::vector<mpq_class>& f, const mpq_class& t) {
  mpq_class acc = 0;
  for (std::size_t k = f.size(); k-- > 0;) acc = acc * t + f[k];
  return acc;
}

}  // namespace

IwasawaElement::IwasawaElement(ContextPtr ctx, std::size_t M_T) : ctx_(std::move(ctx)), M_T_(M_T) {
  if (ctx_->f() != 1) raise(ErrorKind::InvalidArgument, "Iwasawa layer requires f = 1");
  if (M_T_ < 1) raise(ErrorKind::InvalidArgument, "T-truncation must be at least 1");
  comps_.assign(static_cast<std::size_t>(ctx_->p() - 1), std::vector<mpq_class>(M_T_, 0));
}

IwasawaElement IwasawaElement::one(ContextPtr ctx, std::size_t M_T) {
  IwasawaElement x(std::move(ctx), M_T);
  for (auto& c : x.comps_) c[0] = 1;
  return x;
}

IwasawaElement IwasawaElement::scalar_series(ContextPtr ctx, std::size_t M_T, const std::vector<mpq_class>& coeffs) {
  IwasawaElement x(std::move(ctx), M_T);
  for (auto& c : x.comps_)
    for (std::size_t k = 0; k < std::min(M_T, coeffs.size()); ++k) c[k] = coeffs[k];
  return x;
}

void IwasawaElement::set_coefficient(std::size_t i, std::size_t k, const mpq_class& v) {
  if (k >= M_T_) return;
  comps_.at(i)[k] = v;
  comps_[i][k].canonicalize();
}

void IwasawaElement::check_compatible(const IwasawaElement& o) const {
  if (ctx_->p() != o.ctx_->p() || M_T_ != o.M_T_)
    raise(ErrorKind::InvalidArgument, "Iwasawa elements over different primes or truncations");
}

IwasawaElement IwasawaElement::operator+(const IwasawaElement& o) const {
  check_compatible(o);
  IwasawaElement out = *this;
  for (std::size_t i = 0; i < comps_.size(); ++i)
    for (std::size_t k = 0; k < M_T_; ++k) out.comps_[i][k] += o.comps_[i][k];
  return out;
}

IwasawaElement IwasawaElement::operator-(const IwasawaElement& o) const {
  check_compatible(o);
  IwasawaElement out = *this;
  for (std::size_t i = 0; i < comps_.size(); ++i)
    for (std::size_t k = 0; k < M_T_; ++k) out.comps_[i][k] -= o.comps_[i][k];
  return out;
}

IwasawaElement IwasawaElement::operator*(const IwasawaElement& o) const {
  check_compatible(o);
  IwasawaElement out(ctx_, M_T_);
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    const auto& a = comps_[i];
    const auto& b = o.comps_[i];
    auto& c = out.comps_[i];
    for (std::size_t k = 0; k < M_T_; ++k) {
      if (a[k] == 0) continue;
      for (std::size_t l = 0; k + l < M_T_; ++l) c[k + l] += a[k] * b[l];
    }
  }
  return out;
}

IwasawaElement IwasawaElement::operator*(const mpq_class& s) const {
  IwasawaElement out = *this;
  for (auto& c : out.comps_)
    for (auto& v : c) v *= s;
  return out;
}

bool IwasawaElement::operator==(const IwasawaElement& o) const {
  return ctx_->p() == o.ctx_->p() && M_T_ == o.M_T_ && comps_ == o.comps_;
}

std::optional<int> IwasawaElement::min_valuation() const {
  std::optional<int> best;
  for (const auto& c : comps_)
    for (const auto& v : c)
      if (v != 0) {
        const int e = vp(v, ctx_->p());
        if (!best || e < *best) best = e;
      }
  return best;
}

bool IwasawaElement::is_integral() const {
  auto v = min_valuation();
  return !v || *v >= 0;
}

IwasawaElement idempotent(const ContextPtr& ctx, std::size_t i, std::size_t M_T) {
  IwasawaElement x(ctx, M_T);
  if (i >= x.num_components()) raise(ErrorKind::InvalidArgument, "idempotent index outside [0, p-2]");
  x.set_coefficient(i, 0, 1);
  return x;
}

IwasawaElement twist(const IwasawaElement& x, int k) {
  const int p = x.context()->p();
  const std::size_t M = x.truncation(), n = x.num_components();
  mpq_class a = 1;
  const mpq_class base = k >= 0 ? mpq_class(1 + p) : mpq_class(1, 1 + p);
  for (int e = 0; e < std::abs(k); ++e) a *= base;
  const mpq_class b = a - 1;
  // S[m][j]: coefficient of T^j in (b + aT)^m.
  std::vector<std::vector<mpq_class>> S(M, std::vector<mpq_class>(M, 0));
  S[0][0] = 1;
  for (std::size_t m = 1; m < M; ++m)
    for (std::size_t j = 0; j <= m; ++j) {
      S[m][j] = b * S[m - 1][j];
      if (j > 0) S[m][j] += a * S[m - 1][j - 1];
    }
  IwasawaElement out(x.context(), M);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& src = x.component(wrap(static_cast<long>(i) + k, n));
    for (std::size_t j = 0; j < M; ++j) {
      mpq_class c = 0;
      for (std::size_t m = j; m < M; ++m)
        if (src[m] != 0) c += src[m] * S[m][j];
      out.set_coefficient(i, j, c);
    }
  }
  return out;
}

IwasawaElement twist1(const IwasawaElement& x) { return twist(x, 1); }
IwasawaElement twist_inverse(const IwasawaElement& x) { return twist(x, -1); }

mpq_class log_p_one_plus_p(const ContextPtr& ctx) {
  const int p = ctx->p(), N = ctx->N();
  mpq_class sum = 0;
  mpz_class pn = 1;
  for (int n = 1; n <= 2 * N + 16; ++n) {
    pn *= p;
    int vn = 0;
    for (int m = n; m % p == 0; m /= p) ++vn;
    if (n - vn > N) continue;
    mpq_class term(pn, n);
    term.canonicalize();
    if (n % 2 == 0) term = -term;
    sum += term;
  }
  return sum;
}

IwasawaElement ell(const ContextPtr& ctx, int j, std::size_t M_T) {
  const mpq_class L = log_p_one_plus_p(ctx);
  std::vector<mpq_class> coeffs(M_T, 0);
  for (std::size_t n = 1; n < M_T; ++n) {
    mpq_class c(1, static_cast<unsigned long>(n));
    if (n % 2 == 0) c = -c;
    coeffs[n] = c / L;
  }
  coeffs[0] = -j;
  return IwasawaElement::scalar_series(ctx, M_T, coeffs);
}

mpq_class eval_at_zero(const IwasawaElement& x) { return x.coefficient(0, 0); }

mpq_class eval_at_character(const IwasawaElement& x, int k) {
  const int p = x.context()->p();
  mpq_class t = 1;
  const mpq_class base = k >= 0 ? mpq_class(1 + p) : mpq_class(1, 1 + p);
  for (int e = 0; e < std::abs(k); ++e) t *= base;
  return evaluate(x.component(wrap(k, x.num_components())), t - 1);
}

bool is_lambda_unit(const IwasawaElement& x) {
  if (!x.is_integral()) raise(ErrorKind::NotIntegral, "element has a coefficient with p in the denominator");
  const int p = x.context()->p();
  for (std::size_t i = 0; i < x.num_components(); ++i) {
    const mpq_class& c = x.coefficient(i, 0);
    if (c == 0 || vp(c, p) != 0) return false;
  }
  return true;
}

TwistConsistency delta_twist_consistency(const IwasawaElement& delta_V, const IwasawaElement& delta_V1) {
  TwistConsistency out;
  out.consistent = twist1(delta_V) == delta_V1;
  const auto& ctx = delta_V.context();
  const std::size_t n = delta_V.num_components(), M = delta_V.truncation();
  for (std::size_t i = 0; i < n; ++i) {
    const IwasawaElement lhs = idempotent(ctx, i, M) * delta_V1;
    const IwasawaElement rhs = twist1(idempotent(ctx, wrap(static_cast<long>(i) + 1, n), M) * delta_V);
    out.per_idempotent.push_back(lhs == rhs);
  }
  return out;
}

std::string to_string(const IwasawaElement& x) {
  std::ostringstream os;
  for (std::size_t i = 0; i < x.num_components(); ++i) {
    os << "e" << i << ": [";
    for (std::size_t k = 0; k < x.truncation(); ++k) os << (k ? ", " : "") << x.coefficient(i, k).get_str();
    os << "]\n";
  }
  return os.str();
}

}  // namespace wachlab
