#include "wachlab/padic_core.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <utility>

namespace wachlab {

namespace {

bool is_odd_prime(std::int64_t p) {
  if (p < 3 || p % 2 == 0) return false;
  for (std::int64_t d = 3; d * d <= p; d += 2)
    if (p % d == 0) return false;
  return true;
}

// Dense polynomials over F_p, low to high, trailing zeros trimmed.
using FpPoly = std::vector<std::int64_t>;

void trim(FpPoly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

std::int64_t inv_mod(std::int64_t a, std::int64_t p) {
  std::int64_t t = 0, nt = 1, r = p, nr = ((a % p) + p) % p;
  while (nr != 0) {
    std::int64_t q = r / nr;
    std::tie(t, nt) = std::make_pair(nt, t - q * nt);
    std::tie(r, nr) = std::make_pair(nr, r - q * nr);
  }
  return ((t % p) + p) % p;
}

FpPoly poly_mod(FpPoly a, const FpPoly& m, std::int64_t p) {
  trim(a);
  const std::int64_t lead_inv = inv_mod(m.back(), p);
  while (a.size() >= m.size()) {
    const std::int64_t c = a.back() * lead_inv % p;
    const std::size_t shift = a.size() - m.size();
    for (std::size_t i = 0; i < m.size(); ++i)
      a[shift + i] = ((a[shift + i] - c * m[i]) % p + p) % p;
    trim(a);
  }
  return a;
}

FpPoly poly_mulmod(const FpPoly& a, const FpPoly& b, const FpPoly& m, std::int64_t p) {
  if (a.empty() || b.empty()) return {};
  FpPoly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] = (out[i + j] + a[i] * b[j]) % p;
  return poly_mod(std::move(out), m, p);
}

FpPoly poly_gcd(FpPoly a, FpPoly b, std::int64_t p) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    FpPoly r = poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

// Rabin's criterion without the full-power check: g of degree f is
// irreducible iff gcd(g, X^{p^i} - X) = 1 for 1 <= i <= f/2.
bool irreducible_mod_p(const FpPoly& g_in, std::int64_t p) {
  FpPoly g = g_in;
  trim(g);
  const std::size_t f = g.size() - 1;
  if (f == 1) return true;
  FpPoly x = {0, 1};
  FpPoly power = poly_mod(x, g, p);
  for (std::size_t i = 1; i <= f / 2; ++i) {
    // power <- power^p
    FpPoly acc = {1};
    FpPoly base = power;
    std::int64_t e = p;
    while (e > 0) {
      if (e & 1) acc = poly_mulmod(acc, base, g, p);
      base = poly_mulmod(base, base, g, p);
      e >>= 1;
    }
    power = acc;
    FpPoly diff = power;
    diff.resize(std::max<std::size_t>(diff.size(), 2), 0);
    diff[1] = ((diff[1] - 1) % p + p) % p;
    trim(diff);
    if (diff.empty()) return false;
    FpPoly d = poly_gcd(g, diff, p);
    if (d.size() > 1) return false;
  }
  return true;
}

std::vector<std::int64_t> default_modulus(int p, int f) {
  if (f == 1) return {0, 1};
  // Enumerate monic polynomials in lexicographic order of (c_0, ..., c_{f-1}).
  std::vector<std::int64_t> coeffs(f, 0);
  while (true) {
    FpPoly g(coeffs.begin(), coeffs.end());
    g.push_back(1);
    if (coeffs[0] != 0 && irreducible_mod_p(g, p)) return g;
    std::size_t k = 0;
    while (k < coeffs.size() && ++coeffs[k] == p) coeffs[k++] = 0;
    if (k == coeffs.size()) break;
  }
  raise(ErrorKind::InvalidArgument, "no irreducible polynomial found");
}

}  // namespace

// ---------------------------------------------------------------------------
// PrecisionContext

PrecisionContext::PrecisionContext(int p, int f, int N, std::vector<std::int64_t> modulus)
    : p_(p), f_(f), N_(N), pN_(1), batch_(1), modulus_int_(std::move(modulus)) {
  for (int i = 0; i < N_; ++i) pN_ *= static_cast<u64>(p_);
  const u128 limit = ~static_cast<u128>(0);
  const u128 sq = static_cast<u128>(pN_ - 1) * (pN_ - 1);
  batch_ = sq == 0 ? std::numeric_limits<std::size_t>::max() : static_cast<std::size_t>(std::min<u128>(limit / sq, 1u << 20));
  modulus_.resize(modulus_int_.size());
  for (std::size_t i = 0; i < modulus_int_.size(); ++i) modulus_[i] = reduce(modulus_int_[i]);
}

ContextPtr PrecisionContext::create(int p, int f, int N, std::vector<std::int64_t> modulus) {
  if (!is_odd_prime(p)) raise(ErrorKind::InvalidArgument, "p must be an odd prime, got " + std::to_string(p));
  if (f < 1 || f > 16) raise(ErrorKind::InvalidArgument, "residue degree f must be in [1, 16]");
  if (N < 1) raise(ErrorKind::InvalidArgument, "precision N must be >= 1");
  mpz_class bound;
  mpz_ui_pow_ui(bound.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(N));
  if (bound >= mpz_class(1) << 62) raise(ErrorKind::InvalidArgument, "p^N must be below 2^62");
  if (modulus.empty()) {
    modulus = default_modulus(p, f);
  } else {
    if (modulus.size() != static_cast<std::size_t>(f) + 1 || modulus.back() != 1)
      raise(ErrorKind::InvalidArgument, "modulus must be monic of degree f");
    FpPoly g(modulus.size());
    for (std::size_t i = 0; i < modulus.size(); ++i) g[i] = ((modulus[i] % p) + p) % p;
    if (!irreducible_mod_p(g, p)) raise(ErrorKind::InvalidArgument, "modulus is not irreducible mod p");
  }
  auto* raw = new PrecisionContext(p, f, N, std::move(modulus));
  std::shared_ptr<PrecisionContext> ctx(raw);
  ctx->compute_frobenius();
  return ctx;
}

ContextPtr PrecisionContext::with_precision(int N) const { return create(p_, f_, N, modulus_int_); }

u64 PrecisionContext::reduce(std::int64_t v) const noexcept {
  if (v >= 0) return static_cast<u64>(v) % pN_;
  const u64 m = static_cast<u64>(-(v + 1)) % pN_;  // avoids overflow at INT64_MIN
  return pN_ - 1 - m;
}

u64 PrecisionContext::reduce(const mpz_class& v) const {
  mpz_class m(static_cast<unsigned long>(0));
  mpz_class modulus;
  mpz_import(modulus.get_mpz_t(), 1, -1, sizeof(u64), 0, 0, &pN_);
  mpz_fdiv_r(m.get_mpz_t(), v.get_mpz_t(), modulus.get_mpz_t());
  u64 out = 0;
  std::size_t count = 0;
  mpz_export(&out, &count, -1, sizeof(u64), 0, 0, m.get_mpz_t());
  return out;
}

u64 PrecisionContext::p_power(int k) const noexcept {
  if (k >= N_) return 0;
  u64 r = 1;
  for (int i = 0; i < k; ++i) r *= static_cast<u64>(p_);
  return r;
}

int PrecisionContext::valuation(u64 a) const noexcept {
  if (a == 0) return N_;
  int v = 0;
  while (a % static_cast<u64>(p_) == 0) {
    a /= static_cast<u64>(p_);
    ++v;
  }
  return v;
}

void PrecisionContext::reduce_poly(std::vector<u64>& wide, u64* out) const {
  for (std::size_t k = wide.size(); k-- > static_cast<std::size_t>(f_);) {
    const u64 c = wide[k];
    if (c == 0) continue;
    const std::size_t base = k - f_;
    for (int i = 0; i < f_; ++i) wide[base + i] = sub(wide[base + i], mul(c, modulus_[i]));
    wide[k] = 0;
  }
  for (int i = 0; i < f_; ++i) out[i] = wide[i];
}

void PrecisionContext::mul_elem(const u64* a, const u64* b, u64* out) const {
  if (f_ == 1) {
    out[0] = mul(a[0], b[0]);
    return;
  }
  std::vector<u64> wide(2 * f_ - 1, 0);
  for (int i = 0; i < f_; ++i) {
    if (a[i] == 0) continue;
    for (int j = 0; j < f_; ++j) wide[i + j] = add(wide[i + j], mul(a[i], b[j]));
  }
  reduce_poly(wide, out);
}

void PrecisionContext::frobenius_elem(const u64* a, u64* out) const {
  if (f_ == 1) {
    out[0] = a[0];
    return;
  }
  std::vector<u64> acc(f_, 0);
  for (int i = 0; i < f_; ++i) {
    if (a[i] == 0) continue;
    const u64* row = &frobenius_[static_cast<std::size_t>(i) * f_];
    for (int j = 0; j < f_; ++j) acc[j] = add(acc[j], mul(a[i], row[j]));
  }
  std::copy(acc.begin(), acc.end(), out);
}

void PrecisionContext::compute_frobenius() {
  const std::size_t f = static_cast<std::size_t>(f_);
  frobenius_.assign(f * f, 0);
  if (f_ == 1) {
    frobenius_[0] = 1;
    return;
  }
  auto ctx = std::shared_ptr<const PrecisionContext>(this, [](const PrecisionContext*) {});
  std::vector<u64> x_res(f, 0);
  x_res[1 % f] = 1;
  OFElement x = OFElement::from_residues(ctx, x_res);
  // Hensel/Newton on g starting from X^p.
  OFElement y = x.pow(mpz_class(p_));
  auto eval = [&](const OFElement& t, bool derivative) {
    OFElement acc(ctx);
    for (std::size_t k = modulus_int_.size(); k-- > 0;) {
      const std::int64_t c = derivative ? (k == 0 ? 0 : modulus_int_[k] * static_cast<std::int64_t>(k)) : modulus_int_[k];
      if (derivative && k == 0) break;
      acc = acc * t + OFElement::from_integer(ctx, c);
    }
    return acc;
  };
  for (int iter = 0; iter < 2 * N_ + 4; ++iter) {
    OFElement gy = eval(y, false);
    if (gy.is_zero()) break;
    y = y - gy * eval(y, true).inverse();
  }
  OFElement power = OFElement::from_integer(ctx, 1);
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = 0; j < f; ++j) frobenius_[i * f + j] = power.coefficient(j);
    power = power * y;
  }
}

// ---------------------------------------------------------------------------
// OFElement

OFElement::OFElement(ContextPtr ctx) : ctx_(std::move(ctx)), coeffs_(static_cast<std::size_t>(ctx_->f()), 0) {}

OFElement OFElement::from_integer(ContextPtr ctx, std::int64_t v) {
  OFElement out(std::move(ctx));
  out.coeffs_[0] = out.ctx_->reduce(v);
  return out;
}

OFElement OFElement::from_mpz(ContextPtr ctx, const mpz_class& v) {
  OFElement out(std::move(ctx));
  out.coeffs_[0] = out.ctx_->reduce(v);
  return out;
}

OFElement OFElement::from_coefficients(ContextPtr ctx, std::span<const std::int64_t> coeffs) {
  OFElement out(std::move(ctx));
  if (coeffs.size() > out.coeffs_.size()) raise(ErrorKind::InvalidArgument, "too many coefficients for O_F element");
  for (std::size_t i = 0; i < coeffs.size(); ++i) out.coeffs_[i] = out.ctx_->reduce(coeffs[i]);
  return out;
}

OFElement OFElement::from_residues(ContextPtr ctx, std::span<const u64> residues) {
  OFElement out(std::move(ctx));
  if (residues.size() != out.coeffs_.size()) raise(ErrorKind::InvalidArgument, "residue vector has wrong length");
  for (std::size_t i = 0; i < residues.size(); ++i) out.coeffs_[i] = residues[i] % out.ctx_->pN();
  return out;
}

void OFElement::check_same(const OFElement& o) const {
  if (ctx_ != o.ctx_ && !ctx_->same_ring(*o.ctx_)) raise(ErrorKind::InvalidArgument, "mixing elements of different contexts");
}

bool OFElement::is_zero() const noexcept {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](u64 c) { return c == 0; });
}

int OFElement::valuation() const noexcept {
  int v = ctx_->N();
  for (u64 c : coeffs_) v = std::min(v, ctx_->valuation(c));
  return v;
}

OFElement OFElement::operator+(const OFElement& o) const {
  OFElement r = *this;
  r += o;
  return r;
}
OFElement OFElement::operator-(const OFElement& o) const {
  OFElement r = *this;
  r -= o;
  return r;
}
OFElement OFElement::operator*(const OFElement& o) const {
  check_same(o);
  OFElement r(ctx_);
  ctx_->mul_elem(coeffs_.data(), o.coeffs_.data(), r.coeffs_.data());
  return r;
}
OFElement OFElement::operator-() const {
  OFElement r(ctx_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) r.coeffs_[i] = ctx_->neg(coeffs_[i]);
  return r;
}
OFElement& OFElement::operator+=(const OFElement& o) {
  check_same(o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] = ctx_->add(coeffs_[i], o.coeffs_[i]);
  return *this;
}
OFElement& OFElement::operator-=(const OFElement& o) {
  check_same(o);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] = ctx_->sub(coeffs_[i], o.coeffs_[i]);
  return *this;
}
OFElement& OFElement::operator*=(const OFElement& o) {
  *this = *this * o;
  return *this;
}
bool OFElement::operator==(const OFElement& o) const {
  check_same(o);
  return coeffs_ == o.coeffs_;
}

OFElement OFElement::pow(const mpz_class& e) const {
  if (e < 0) return inverse().pow(-e);
  OFElement result = from_integer(ctx_, 1);
  OFElement base = *this;
  const std::size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
  for (std::size_t i = bits; i-- > 0;) {
    result = result * result;
    if (mpz_tstbit(e.get_mpz_t(), i)) result = result * base;
  }
  return result;
}

OFElement OFElement::inverse() const {
  if (!is_unit()) raise(ErrorKind::NotAUnit, "element " + to_string() + " is not a unit");
  const int p = ctx_->p();
  mpz_class q;
  mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(ctx_->f()));
  // x^{q-2} inverts x modulo p; Newton doubles the precision each step.
  OFElement y = pow(q - 2);
  const OFElement two = from_integer(ctx_, 2);
  for (int known = 1; known < ctx_->N(); known *= 2) y = y * (two - *this * y);
  return y;
}

OFElement OFElement::exact_divide_p_power(int k) const {
  if (k < 0) raise(ErrorKind::InvalidArgument, "negative p-power");
  if (k == 0) return *this;
  if (ctx_->N() - k < 1) raise(ErrorKind::PrecisionLoss, "division by p^" + std::to_string(k) + " exhausts precision");
  if (valuation() < k) raise(ErrorKind::ExactDivisionFailure, to_string() + " is not divisible by p^" + std::to_string(k));
  auto lower = ctx_->with_precision(ctx_->N() - k);
  OFElement out(lower);
  const u64 pk = ctx_->p_power(k);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out.coeffs_[i] = (coeffs_[i] / pk) % lower->pN();
  return out;
}

OFElement OFElement::reduce_to(int n) const {
  if (n > ctx_->N()) raise(ErrorKind::PrecisionLoss, "cannot raise precision");
  if (n == ctx_->N()) return *this;
  auto lower = ctx_->with_precision(n);
  OFElement out(lower);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) out.coeffs_[i] = coeffs_[i] % lower->pN();
  return out;
}

std::string OFElement::to_string() const {
  if (coeffs_.size() == 1) return std::to_string(coeffs_[0]);
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << coeffs_[i];
  os << ']';
  return os.str();
}

OFElement frobenius(const OFElement& x) {
  const auto& ctx = x.context();
  std::vector<u64> out(static_cast<std::size_t>(ctx->f()));
  ctx->frobenius_elem(x.coefficients().data(), out.data());
  return OFElement::from_residues(ctx, out);
}

OFElement frobenius_power(const OFElement& x, int k) {
  const int f = x.context()->f();
  k = ((k % f) + f) % f;
  OFElement y = x;
  for (int i = 0; i < k; ++i) y = frobenius(y);
  return y;
}

OFElement teichmuller(const ContextPtr& ctx, std::int64_t u) {
  if (u % ctx->p() == 0) raise(ErrorKind::NotAUnit, std::to_string(u) + " is divisible by p");
  mpz_class q;
  mpz_ui_pow_ui(q.get_mpz_t(), static_cast<unsigned long>(ctx->p()), static_cast<unsigned long>(ctx->f()));
  OFElement x = OFElement::from_integer(ctx, u);
  // Each application of x -> x^q fixes one more p-adic digit.
  for (int i = 0; i <= ctx->N(); ++i) {
    OFElement next = x.pow(q);
    if (next == x) break;
    x = next;
  }
  return x;
}

// ---------------------------------------------------------------------------
// OFMatrix

OFMatrix::OFMatrix(ContextPtr ctx, std::size_t rows, std::size_t cols)
    : ctx_(std::move(ctx)), rows_(rows), cols_(cols), entries_(rows * cols, OFElement(ctx_)) {}

OFMatrix OFMatrix::identity(ContextPtr ctx, std::size_t n) {
  OFMatrix m(ctx, n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = OFElement::from_integer(ctx, 1);
  return m;
}

OFMatrix OFMatrix::from_integers(ContextPtr ctx, const std::vector<std::vector<std::int64_t>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows[0].size();
  OFMatrix m(ctx, r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows[i].size() != c) raise(ErrorKind::InvalidArgument, "ragged matrix");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = OFElement::from_integer(ctx, rows[i][j]);
  }
  return m;
}

OFMatrix OFMatrix::diagonal(const std::vector<OFElement>& entries) {
  if (entries.empty()) raise(ErrorKind::InvalidArgument, "empty diagonal");
  OFMatrix m(entries[0].context(), entries.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) m(i, i) = entries[i];
  return m;
}

OFMatrix OFMatrix::operator+(const OFMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) raise(ErrorKind::InvalidArgument, "shape mismatch in matrix sum");
  OFMatrix r = *this;
  for (std::size_t k = 0; k < entries_.size(); ++k) r.entries_[k] += o.entries_[k];
  return r;
}

OFMatrix OFMatrix::operator-(const OFMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) raise(ErrorKind::InvalidArgument, "shape mismatch in matrix difference");
  OFMatrix r = *this;
  for (std::size_t k = 0; k < entries_.size(); ++k) r.entries_[k] -= o.entries_[k];
  return r;
}

OFMatrix OFMatrix::operator*(const OFMatrix& o) const {
  if (cols_ != o.rows_) raise(ErrorKind::InvalidArgument, "shape mismatch in matrix product");
  OFMatrix r(ctx_, rows_, o.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const OFElement& a = (*this)(i, k);
      if (a.is_zero()) continue;
      for (std::size_t j = 0; j < o.cols_; ++j) r(i, j) += a * o(k, j);
    }
  return r;
}

OFMatrix OFMatrix::operator*(const OFElement& s) const {
  OFMatrix r = *this;
  for (auto& e : r.entries_) e *= s;
  return r;
}

bool OFMatrix::operator==(const OFMatrix& o) const {
  return rows_ == o.rows_ && cols_ == o.cols_ && entries_ == o.entries_;
}

OFMatrix OFMatrix::transpose() const {
  OFMatrix r(ctx_, cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
  return r;
}

OFMatrix OFMatrix::frobenius() const {
  OFMatrix r = *this;
  for (auto& e : r.entries_) e = wachlab::frobenius(e);
  return r;
}

OFMatrix OFMatrix::reduce_to(int n) const {
  auto lower = ctx_->with_precision(n);
  OFMatrix r(lower, rows_, cols_);
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    std::vector<u64> res(entries_[k].coefficients().begin(), entries_[k].coefficients().end());
    for (auto& c : res) c %= lower->pN();
    r.entries_[k] = OFElement::from_residues(lower, res);
  }
  return r;
}

OFMatrix OFMatrix::submatrix(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) raise(ErrorKind::InvalidArgument, "submatrix out of range");
  OFMatrix r(ctx_, nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nc; ++j) r(i, j) = (*this)(r0 + i, c0 + j);
  return r;
}

bool OFMatrix::is_zero() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), [](const OFElement& e) { return e.is_zero(); });
}

int OFMatrix::valuation() const noexcept {
  int v = ctx_->N();
  for (const auto& e : entries_) v = std::min(v, e.valuation());
  return v;
}

std::vector<OFElement> OFMatrix::characteristic_polynomial() const {
  if (!is_square()) raise(ErrorKind::InvalidArgument, "characteristic polynomial of a non-square matrix");
  const std::size_t n = rows_;
  // Berkowitz: coefficients of det(T - A_r), highest degree first.
  std::vector<OFElement> poly{OFElement::from_integer(ctx_, 1)};
  for (std::size_t r = 1; r <= n; ++r) {
    const std::size_t m = r - 1;
    std::vector<OFElement> toeplitz;
    toeplitz.reserve(r + 1);
    toeplitz.push_back(OFElement::from_integer(ctx_, 1));
    toeplitz.push_back(-(*this)(m, m));
    // col <- A_{m} ^k * C, starting from C = column m above the diagonal.
    std::vector<OFElement> col(m, OFElement(ctx_));
    for (std::size_t i = 0; i < m; ++i) col[i] = (*this)(i, m);
    for (std::size_t k = 2; k <= r; ++k) {
      OFElement dot(ctx_);
      for (std::size_t j = 0; j < m; ++j) dot += (*this)(m, j) * col[j];
      toeplitz.push_back(-dot);
      std::vector<OFElement> next(m, OFElement(ctx_));
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) next[i] += (*this)(i, j) * col[j];
      col = std::move(next);
    }
    std::vector<OFElement> next_poly(r + 1, OFElement(ctx_));
    for (std::size_t j = 0; j < poly.size(); ++j)
      for (std::size_t i = 0; i + j < r + 1 && i < toeplitz.size(); ++i) next_poly[i + j] += toeplitz[i] * poly[j];
    poly = std::move(next_poly);
  }
  std::reverse(poly.begin(), poly.end());
  return poly;
}

OFElement OFMatrix::determinant() const {
  auto cp = characteristic_polynomial();
  OFElement c0 = cp.front();
  return rows_ % 2 == 0 ? c0 : -c0;
}

OFMatrix OFMatrix::inverse() const {
  if (!is_square()) raise(ErrorKind::InvalidArgument, "inverse of a non-square matrix");
  const std::size_t n = rows_;
  OFMatrix a = *this;
  OFMatrix inv = identity(ctx_, n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = n;
    for (std::size_t i = k; i < n; ++i)
      if (a(i, k).is_unit()) {
        piv = i;
        break;
      }
    if (piv == n) raise(ErrorKind::NotAUnit, "matrix determinant is not a unit");
    if (piv != k)
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(k, j), a(piv, j));
        std::swap(inv(k, j), inv(piv, j));
      }
    const OFElement s = a(k, k).inverse();
    for (std::size_t j = 0; j < n; ++j) {
      a(k, j) *= s;
      inv(k, j) *= s;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || a(i, k).is_zero()) continue;
      const OFElement factor = a(i, k);
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= factor * a(k, j);
        inv(i, j) -= factor * inv(k, j);
      }
    }
  }
  return inv;
}

std::string OFMatrix::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < rows_; ++i) {
    os << (i ? ", [" : "[");
    for (std::size_t j = 0; j < cols_; ++j) os << (j ? ", " : "") << (*this)(i, j).to_string();
    os << ']';
  }
  os << ']';
  return os.str();
}

// ---------------------------------------------------------------------------
// Smith normal form

namespace {

// q with q * p^v == x, for v <= valuation(x); exact on representatives.
OFElement divide_out(const OFElement& x, int v) {
  const auto& ctx = x.context();
  const u64 pv = ctx->p_power(v);
  std::vector<u64> res(x.coefficients().begin(), x.coefficients().end());
  for (auto& c : res) c /= pv;
  return OFElement::from_residues(ctx, res);
}

}  // namespace

int SmithForm::total_exponent(std::size_t required) const {
  if (rank < required)
    raise(ErrorKind::PrecisionLoss, "only " + std::to_string(rank) + " of " + std::to_string(required) +
                                        " elementary divisors are nonzero at working precision");
  int total = 0;
  for (const auto& e : exponents)
    if (e) total += *e;
  return total;
}

SmithForm smith_normal_form(const OFMatrix& m) {
  const auto& ctx = m.context();
  const int N = ctx->N();
  const std::size_t r = m.rows(), c = m.cols();
  SmithForm out{OFMatrix::identity(ctx, r), m, OFMatrix::identity(ctx, c), {}, 0};
  OFMatrix& U = out.U;
  OFMatrix& D = out.D;
  OFMatrix& V = out.V;
  const std::size_t steps = std::min(r, c);
  for (std::size_t k = 0; k < steps; ++k) {
    // Minimal valuation, ties broken in row-major order.
    int best = N;
    std::size_t bi = k, bj = k;
    for (std::size_t i = k; i < r; ++i)
      for (std::size_t j = k; j < c; ++j) {
        const int v = D(i, j).valuation();
        if (v < best) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    if (best >= N) {
      for (std::size_t t = k; t < steps; ++t) out.exponents.emplace_back(std::nullopt);
      break;
    }
    if (bi != k) {
      for (std::size_t j = 0; j < c; ++j) std::swap(D(k, j), D(bi, j));
      for (std::size_t j = 0; j < r; ++j) std::swap(U(k, j), U(bi, j));
    }
    if (bj != k) {
      for (std::size_t i = 0; i < r; ++i) std::swap(D(i, k), D(i, bj));
      for (std::size_t i = 0; i < c; ++i) std::swap(V(i, k), V(i, bj));
    }
    const OFElement unit_inv = divide_out(D(k, k), best).inverse();
    for (std::size_t i = k + 1; i < r; ++i) {
      if (D(i, k).is_zero()) continue;
      const OFElement factor = divide_out(D(i, k), best) * unit_inv;
      for (std::size_t j = k; j < c; ++j) D(i, j) -= factor * D(k, j);
      for (std::size_t j = 0; j < r; ++j) U(i, j) -= factor * U(k, j);
    }
    for (std::size_t j = k + 1; j < c; ++j) {
      if (D(k, j).is_zero()) continue;
      const OFElement factor = divide_out(D(k, j), best) * unit_inv;
      for (std::size_t i = k; i < r; ++i) D(i, j) -= factor * D(i, k);
      for (std::size_t i = 0; i < c; ++i) V(i, j) -= factor * V(i, k);
    }
    out.exponents.emplace_back(best);
    ++out.rank;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Newton polygons and stable rank

std::vector<mpq_class> newton_polygon_slopes(const std::vector<std::optional<int>>& vals, int precision) {
  if (vals.empty()) return {};
  const std::size_t d = vals.size() - 1;
  if (!vals[0])
    raise(ErrorKind::PrecisionLoss, "constant coefficient vanishes at precision " + std::to_string(precision));
  struct Pt {
    long x;
    long y;
  };
  std::vector<Pt> pts;
  for (std::size_t i = 0; i <= d; ++i)
    if (vals[i]) pts.push_back({static_cast<long>(i), *vals[i]});
  // Lower hull (Andrew's monotone chain, points already sorted by x).
  std::vector<Pt> hull;
  for (const Pt& q : pts) {
    while (hull.size() >= 2) {
      const Pt& a = hull[hull.size() - 2];
      const Pt& b = hull[hull.size() - 1];
      const long cross = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
      if (cross <= 0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(q);
  }
  std::vector<mpq_class> slopes;
  for (std::size_t k = 1; k < hull.size(); ++k) {
    const long len = hull[k].x - hull[k - 1].x;
    mpq_class s(hull[k - 1].y - hull[k].y, len);
    s.canonicalize();
    for (long t = 0; t < len; ++t) slopes.push_back(s);
  }
  std::sort(slopes.begin(), slopes.end());
  return slopes;
}

std::vector<mpq_class> newton_slopes(const OFMatrix& m) {
  if (!m.is_square()) raise(ErrorKind::InvalidArgument, "newton_slopes needs a square matrix");
  const auto& ctx = m.context();
  OFMatrix prod = m;
  OFMatrix twist = m;
  for (int k = 1; k < ctx->f(); ++k) {
    twist = twist.frobenius();
    prod = prod * twist;
  }
  auto cp = prod.characteristic_polynomial();
  std::vector<std::optional<int>> vals;
  for (const auto& c : cp) {
    if (c.is_zero())
      vals.emplace_back(std::nullopt);
    else
      vals.emplace_back(c.valuation());
  }
  auto slopes = newton_polygon_slopes(vals, ctx->N());
  for (auto& s : slopes) {
    s /= ctx->f();
    s.canonicalize();
  }
  return slopes;
}

std::size_t residue_rank(const OFMatrix& m) {
  OFMatrix a = m.reduce_to(1);
  const std::size_t r = a.rows(), c = a.cols();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < c && rank < r; ++col) {
    std::size_t piv = r;
    for (std::size_t i = rank; i < r; ++i)
      if (!a(i, col).is_zero()) {
        piv = i;
        break;
      }
    if (piv == r) continue;
    for (std::size_t j = 0; j < c; ++j) std::swap(a(rank, j), a(piv, j));
    const OFElement inv = a(rank, col).inverse();
    for (std::size_t i = rank + 1; i < r; ++i) {
      if (a(i, col).is_zero()) continue;
      const OFElement factor = a(i, col) * inv;
      for (std::size_t j = col; j < c; ++j) a(i, j) -= factor * a(rank, j);
    }
    ++rank;
  }
  return rank;
}

std::size_t semilinear_stable_rank(const OFMatrix& m) {
  if (!m.is_square()) raise(ErrorKind::InvalidArgument, "semilinear_stable_rank needs a square matrix");
  const OFMatrix b = m.reduce_to(1);
  const std::size_t steps = std::max<std::size_t>(1, b.rows() * static_cast<std::size_t>(m.context()->f()));
  OFMatrix prod = b;
  OFMatrix twist = b;
  for (std::size_t k = 1; k < steps; ++k) {
    twist = twist.frobenius();
    prod = prod * twist;
  }
  return residue_rank(prod);
}

// ---------------------------------------------------------------------------
// Exact rationals

std::size_t rational_rank(RationalMatrix a) {
  const std::size_t r = a.size();
  const std::size_t c = r == 0 ? 0 : a[0].size();
  std::size_t rank = 0;
  for (std::size_t col = 0; col < c && rank < r; ++col) {
    std::size_t piv = r;
    for (std::size_t i = rank; i < r; ++i)
      if (a[i][col] != 0) {
        piv = i;
        break;
      }
    if (piv == r) continue;
    std::swap(a[rank], a[piv]);
    for (std::size_t i = rank + 1; i < r; ++i) {
      if (a[i][col] == 0) continue;
      const mpq_class factor = a[i][col] / a[rank][col];
      for (std::size_t j = col; j < c; ++j) a[i][j] -= factor * a[rank][j];
    }
    ++rank;
  }
  return rank;
}

RationalMatrix rational_multiply(const RationalMatrix& a, const RationalMatrix& b) {
  const std::size_t n = a.size(), k = b.size(), m = k == 0 ? 0 : b[0].size();
  RationalMatrix out(n, std::vector<mpq_class>(m, 0));
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].size() != k) raise(ErrorKind::InvalidArgument, "shape mismatch in rational product");
    for (std::size_t t = 0; t < k; ++t) {
      if (a[i][t] == 0) continue;
      for (std::size_t j = 0; j < m; ++j) out[i][j] += a[i][t] * b[t][j];
    }
  }
  return out;
}

bool is_semisimple_at(const RationalMatrix& m, const mpq_class& alpha) {
  RationalMatrix shifted = m;
  for (std::size_t i = 0; i < shifted.size(); ++i) {
    if (shifted[i].size() != shifted.size()) raise(ErrorKind::InvalidArgument, "is_semisimple_at needs a square matrix");
    shifted[i][i] -= alpha;
  }
  return rational_rank(shifted) == rational_rank(rational_multiply(shifted, shifted));
}

int rational_valuation(const mpq_class& q, int p) {
  if (q == 0) raise(ErrorKind::InvalidArgument, "valuation of zero");
  int v = 0;
  mpz_class num = q.get_num(), den = q.get_den();
  while (mpz_divisible_ui_p(num.get_mpz_t(), static_cast<unsigned long>(p))) {
    num /= p;
    ++v;
  }
  while (mpz_divisible_ui_p(den.get_mpz_t(), static_cast<unsigned long>(p))) {
    den /= p;
    --v;
  }
  return v;
}

std::string slope_to_string(const mpq_class& q) {
  mpq_class c = q;
  c.canonicalize();
  return c.get_str();
}

}  // namespace wachlab
