#include "wachlab/aplus.hpp"

#include <algorithm>
#include <sstream>

namespace wachlab {

namespace {

// out[k] = sum_{i+j=k, k<M} a_i b_j with delayed reduction for f = 1.
void convolve_f1(const PrecisionContext& ctx, const u64* a, const u64* b, std::size_t M, u64* out) {
  const std::size_t batch = ctx.accumulate_batch();
  std::vector<u128> acc(M, 0);
  std::size_t pending = 0;
  for (std::size_t i = 0; i < M; ++i) {
    const u64 ai = a[i];
    if (ai != 0) {
      for (std::size_t j = 0; i + j < M; ++j) acc[i + j] += static_cast<u128>(ai) * b[j];
      if (++pending == batch) {
        for (auto& x : acc) x = ctx.reduce_wide(x);
        pending = 1;
      }
    }
  }
  for (std::size_t k = 0; k < M; ++k) out[k] = ctx.reduce_wide(acc[k]);
}

void convolve_general(const PrecisionContext& ctx, const u64* a, const u64* b, std::size_t M, u64* out) {
  const std::size_t f = static_cast<std::size_t>(ctx.f());
  std::vector<u64> prod(f);
  std::fill(out, out + M * f, 0);
  for (std::size_t i = 0; i < M; ++i) {
    const u64* ai = a + i * f;
    if (std::all_of(ai, ai + f, [](u64 x) { return x == 0; })) continue;
    for (std::size_t j = 0; i + j < M; ++j) {
      ctx.mul_elem(ai, b + j * f, prod.data());
      u64* o = out + (i + j) * f;
      for (std::size_t t = 0; t < f; ++t) o[t] = ctx.add(o[t], prod[t]);
    }
  }
}

}  // namespace

APlusSeries::APlusSeries(ContextPtr ctx, std::size_t M)
    : ctx_(std::move(ctx)), M_(M), data_(M * static_cast<std::size_t>(ctx_->f()), 0) {}

APlusSeries APlusSeries::constant(const OFElement& c, std::size_t M) {
  APlusSeries s(c.context(), M);
  if (M > 0) s.set_coefficient(0, c);
  return s;
}

APlusSeries APlusSeries::from_integers(ContextPtr ctx, std::size_t M, const std::vector<std::int64_t>& coeffs) {
  APlusSeries s(ctx, M);
  for (std::size_t i = 0; i < coeffs.size() && i < M; ++i) s.raw(i)[0] = ctx->reduce(coeffs[i]);
  return s;
}

APlusSeries APlusSeries::one(ContextPtr ctx, std::size_t M) { return from_integers(std::move(ctx), M, {1}); }

APlusSeries APlusSeries::pi(ContextPtr ctx, std::size_t M) { return from_integers(std::move(ctx), M, {0, 1}); }

OFElement APlusSeries::coefficient(std::size_t i) const {
  if (i >= M_) return OFElement(ctx_);
  return OFElement::from_residues(ctx_, std::span<const u64>(raw(i), static_cast<std::size_t>(ctx_->f())));
}

void APlusSeries::set_coefficient(std::size_t i, const OFElement& c) {
  if (i >= M_) raise(ErrorKind::InvalidArgument, "coefficient index beyond truncation");
  if (c.context() != ctx_ && !c.context()->same_ring(*ctx_))
    raise(ErrorKind::InvalidArgument, "coefficient from a different context");
  std::copy(c.coefficients().begin(), c.coefficients().end(), raw(i));
}

bool APlusSeries::is_zero() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](u64 x) { return x == 0; });
}

std::size_t APlusSeries::pi_valuation() const noexcept {
  const std::size_t f = static_cast<std::size_t>(ctx_->f());
  for (std::size_t i = 0; i < M_; ++i)
    for (std::size_t t = 0; t < f; ++t)
      if (data_[i * f + t] != 0) return i;
  return M_;
}

int APlusSeries::p_valuation() const noexcept {
  int v = ctx_->N();
  for (u64 x : data_) v = std::min(v, ctx_->valuation(x));
  return v;
}

APlusSeries APlusSeries::binary_check(const APlusSeries& o) const {
  if (ctx_ != o.ctx_ && !ctx_->same_ring(*o.ctx_)) raise(ErrorKind::InvalidArgument, "mixing series of different contexts");
  return APlusSeries(ctx_, std::min(M_, o.M_));
}

APlusSeries APlusSeries::operator+(const APlusSeries& o) const {
  APlusSeries r = binary_check(o);
  for (std::size_t k = 0; k < r.data_.size(); ++k) r.data_[k] = ctx_->add(data_[k], o.data_[k]);
  return r;
}

APlusSeries APlusSeries::operator-(const APlusSeries& o) const {
  APlusSeries r = binary_check(o);
  for (std::size_t k = 0; k < r.data_.size(); ++k) r.data_[k] = ctx_->sub(data_[k], o.data_[k]);
  return r;
}

APlusSeries APlusSeries::operator-() const {
  APlusSeries r(ctx_, M_);
  for (std::size_t k = 0; k < data_.size(); ++k) r.data_[k] = ctx_->neg(data_[k]);
  return r;
}

APlusSeries APlusSeries::operator*(const APlusSeries& o) const {
  APlusSeries r = binary_check(o);
  if (ctx_->f() == 1)
    convolve_f1(*ctx_, data_.data(), o.data_.data(), r.M_, r.data_.data());
  else
    convolve_general(*ctx_, data_.data(), o.data_.data(), r.M_, r.data_.data());
  return r;
}

APlusSeries APlusSeries::operator*(const OFElement& s) const {
  APlusSeries r(ctx_, M_);
  for (std::size_t i = 0; i < M_; ++i) ctx_->mul_elem(raw(i), s.coefficients().data(), r.raw(i));
  return r;
}

APlusSeries& APlusSeries::operator+=(const APlusSeries& o) {
  *this = *this + o;
  return *this;
}

APlusSeries& APlusSeries::operator-=(const APlusSeries& o) {
  *this = *this - o;
  return *this;
}

bool APlusSeries::operator==(const APlusSeries& o) const {
  const std::size_t n = std::min(data_.size(), o.data_.size());
  return std::equal(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(n), o.data_.begin());
}

APlusSeries APlusSeries::truncate(std::size_t M) const {
  APlusSeries r(ctx_, std::min(M, M_));
  std::copy(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(r.data_.size()), r.data_.begin());
  return r;
}

APlusSeries APlusSeries::pow(unsigned e) const {
  APlusSeries result = one(ctx_, M_);
  APlusSeries base = *this;
  while (e > 0) {
    if (e & 1) result = result * base;
    e >>= 1;
    if (e) base = base * base;
  }
  return result;
}

APlusSeries APlusSeries::sigma() const {
  APlusSeries r(ctx_, M_);
  for (std::size_t i = 0; i < M_; ++i) ctx_->frobenius_elem(raw(i), r.raw(i));
  return r;
}

APlusSeries APlusSeries::shift_up(std::size_t k) const {
  APlusSeries r(ctx_, M_);
  const std::size_t f = static_cast<std::size_t>(ctx_->f());
  for (std::size_t i = 0; i + k < M_; ++i) std::copy(raw(i), raw(i) + f, r.raw(i + k));
  return r;
}

std::string APlusSeries::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < M_; ++i) {
    OFElement c = coefficient(i);
    if (c.is_zero()) continue;
    os << (first ? "" : " + ") << c.to_string();
    if (i > 0) os << "*pi^" << i;
    first = false;
  }
  if (first) os << '0';
  os << " + O(pi^" << M_ << ')';
  return os.str();
}

// ---------------------------------------------------------------------------

SubstitutionTable::SubstitutionTable(const APlusSeries& image, std::size_t count) : M_(image.order()) {
  if (image.order() > 0 && !image.coefficient(0).is_zero())
    raise(ErrorKind::InvalidArgument, "substituted series must have zero constant term");
  powers_.reserve(count);
  if (count > 0) powers_.push_back(APlusSeries::one(image.context(), M_));
  for (std::size_t i = 1; i < count; ++i) powers_.push_back(powers_.back() * image);
}

APlusSeries SubstitutionTable::apply(const APlusSeries& s, bool apply_sigma) const {
  const auto& ctx = s.context();
  const std::size_t M = std::min(s.order(), M_);
  if (M > powers_.size()) raise(ErrorKind::InvalidArgument, "substitution table too short");
  APlusSeries src = apply_sigma ? s.sigma() : s;
  APlusSeries out(ctx, M);
  if (ctx->f() == 1) {
    // Image has pi-valuation >= 1, so a_i contributes only to indices >= i.
    const std::size_t batch = ctx->accumulate_batch();
    std::vector<u128> acc(M, 0);
    std::size_t pending = 0;
    for (std::size_t i = 0; i < M; ++i) {
      const u64 ai = src.raw(i)[0];
      if (ai == 0) continue;
      const u64* pw = powers_[i].raw(0);
      for (std::size_t k = i; k < M; ++k) acc[k] += static_cast<u128>(ai) * pw[k];
      if (++pending == batch) {
        for (auto& x : acc) x = ctx->reduce_wide(x);
        pending = 1;
      }
    }
    for (std::size_t k = 0; k < M; ++k) out.raw(k)[0] = ctx->reduce_wide(acc[k]);
    return out;
  }
  const std::size_t f = static_cast<std::size_t>(ctx->f());
  std::vector<u64> prod(f);
  for (std::size_t i = 0; i < M; ++i) {
    const u64* ai = src.raw(i);
    if (std::all_of(ai, ai + f, [](u64 x) { return x == 0; })) continue;
    for (std::size_t k = i; k < M; ++k) {
      ctx->mul_elem(ai, powers_[i].raw(k), prod.data());
      u64* o = out.raw(k);
      for (std::size_t t = 0; t < f; ++t) o[t] = ctx->add(o[t], prod[t]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

APlusSeries gamma_pi(const ContextPtr& ctx, std::size_t M, const mpz_class& c) {
  APlusSeries out(ctx, M);
  mpz_class binom = 1;
  for (std::size_t k = 1; k < M; ++k) {
    binom *= c - static_cast<long>(k) + 1;
    mpz_divexact_ui(binom.get_mpz_t(), binom.get_mpz_t(), static_cast<unsigned long>(k));
    out.raw(k)[0] = ctx->reduce(binom);
  }
  return out;
}

APlusSeries phi_series(const APlusSeries& s) {
  const auto& ctx = s.context();
  SubstitutionTable table(gamma_pi(ctx, s.order(), ctx->p()), s.order());
  return table.apply(s, true);
}

APlusSeries gamma_series(const APlusSeries& s, const mpz_class& c) {
  const auto& ctx = s.context();
  if (mpz_divisible_ui_p(c.get_mpz_t(), static_cast<unsigned long>(ctx->p())))
    raise(ErrorKind::NotAUnit, "gamma_series needs c prime to p, got " + c.get_str());
  SubstitutionTable table(gamma_pi(ctx, s.order(), c), s.order());
  return table.apply(s, false);
}

APlusSeries q_series(const ContextPtr& ctx, std::size_t M) {
  APlusSeries out(ctx, M);
  mpz_class binom;
  for (int k = 1; k <= ctx->p(); ++k) {
    if (static_cast<std::size_t>(k - 1) >= M) break;
    mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(ctx->p()), static_cast<unsigned long>(k));
    out.raw(static_cast<std::size_t>(k - 1))[0] = ctx->reduce(binom);
  }
  return out;
}

APlusSeries mu_series(const ContextPtr& ctx, std::size_t M) {
  // (q - pi^{p-1}) / p = sum_{k=1}^{p-1} C(p,k)/p pi^{k-1}, constant term 1.
  APlusSeries u(ctx, M);
  mpz_class binom;
  for (int k = 1; k < ctx->p(); ++k) {
    if (static_cast<std::size_t>(k - 1) >= M) break;
    mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(ctx->p()), static_cast<unsigned long>(k));
    mpz_divexact_ui(binom.get_mpz_t(), binom.get_mpz_t(), static_cast<unsigned long>(ctx->p()));
    u.raw(static_cast<std::size_t>(k - 1))[0] = ctx->reduce(binom);
  }
  return invert_series(u);
}

APlusSeries exact_div_pi(const APlusSeries& s, std::size_t k) {
  if (k > s.order()) raise(ErrorKind::PrecisionLoss, "pi-division beyond the truncation order");
  if (s.pi_valuation() < k)
    raise(ErrorKind::ExactDivisionFailure, "coefficient of pi^" + std::to_string(s.pi_valuation()) + " is nonzero");
  const auto& ctx = s.context();
  const std::size_t f = static_cast<std::size_t>(ctx->f());
  APlusSeries out(ctx, s.order() - k);
  for (std::size_t i = 0; i < out.order(); ++i) std::copy(s.raw(i + k), s.raw(i + k) + f, out.raw(i));
  return out;
}

APlusSeries invert_series(const APlusSeries& s) {
  const auto& ctx = s.context();
  const std::size_t M = s.order();
  if (M == 0) return s;
  const OFElement a0 = s.coefficient(0);
  if (!a0.is_unit()) raise(ErrorKind::NotAUnit, "constant term " + a0.to_string() + " is not a unit");
  const OFElement inv0 = a0.inverse();
  // b_n = -a0^{-1} sum_{k=1}^n a_k b_{n-k}
  APlusSeries out(ctx, M);
  out.set_coefficient(0, inv0);
  const std::size_t f = static_cast<std::size_t>(ctx->f());
  std::vector<u64> acc(f), prod(f);
  for (std::size_t n = 1; n < M; ++n) {
    std::fill(acc.begin(), acc.end(), 0);
    for (std::size_t k = 1; k <= n; ++k) {
      ctx->mul_elem(s.raw(k), out.raw(n - k), prod.data());
      for (std::size_t t = 0; t < f; ++t) acc[t] = ctx->add(acc[t], prod[t]);
    }
    ctx->mul_elem(acc.data(), inv0.coefficients().data(), out.raw(n));
    for (std::size_t t = 0; t < f; ++t) out.raw(n)[t] = ctx->neg(out.raw(n)[t]);
  }
  return out;
}

}  // namespace wachlab
