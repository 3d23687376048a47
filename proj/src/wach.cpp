#include "wachlab/wach.hpp"

#include <algorithm>
#include <random>

namespace wachlab {

// ---------------------------------------------------------------------------
// SeriesMatrix

SeriesMatrix::SeriesMatrix(ContextPtr ctx, std::size_t rows, std::size_t cols, std::size_t M)
    : ctx_(std::move(ctx)), rows_(rows), cols_(cols), M_(M), entries_(rows * cols, APlusSeries(ctx_, M)) {}

SeriesMatrix SeriesMatrix::identity(ContextPtr ctx, std::size_t n, std::size_t M) {
  SeriesMatrix out(ctx, n, n, M);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = APlusSeries::one(ctx, M);
  return out;
}

SeriesMatrix SeriesMatrix::constant(const OFMatrix& m, std::size_t M) {
  SeriesMatrix out(m.context(), m.rows(), m.cols(), M);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = APlusSeries::constant(m(i, j), M);
  return out;
}

SeriesMatrix SeriesMatrix::operator+(const SeriesMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) raise(ErrorKind::InvalidArgument, "shape mismatch in series matrix sum");
  SeriesMatrix out(ctx_, rows_, cols_, std::min(M_, o.M_));
  for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = entries_[k] + o.entries_[k];
  return out;
}

SeriesMatrix SeriesMatrix::operator-(const SeriesMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) raise(ErrorKind::InvalidArgument, "shape mismatch in series matrix difference");
  SeriesMatrix out(ctx_, rows_, cols_, std::min(M_, o.M_));
  for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = entries_[k] - o.entries_[k];
  return out;
}

SeriesMatrix SeriesMatrix::operator*(const SeriesMatrix& o) const {
  if (cols_ != o.rows_) raise(ErrorKind::InvalidArgument, "shape mismatch in series matrix product");
  const std::size_t M = std::min(M_, o.M_);
  SeriesMatrix out(ctx_, rows_, o.cols_, M);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < o.cols_; ++j) {
      APlusSeries acc(ctx_, M);
      for (std::size_t k = 0; k < cols_; ++k) {
        const APlusSeries& a = (*this)(i, k);
        const APlusSeries& b = o(k, j);
        if (a.is_zero() || b.is_zero()) continue;
        acc += a * b;
      }
      out(i, j) = acc;
    }
  return out;
}

SeriesMatrix SeriesMatrix::operator*(const OFElement& s) const {
  return map([&](const APlusSeries& x) { return x * s; });
}

bool SeriesMatrix::operator==(const SeriesMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) return false;
  for (std::size_t k = 0; k < entries_.size(); ++k)
    if (entries_[k] != o.entries_[k]) return false;
  return true;
}

SeriesMatrix SeriesMatrix::truncate(std::size_t M) const {
  return map([&](const APlusSeries& x) { return x.truncate(M); });
}

SeriesMatrix SeriesMatrix::shift_up(std::size_t k) const {
  return map([&](const APlusSeries& x) { return x.shift_up(k); });
}

bool SeriesMatrix::is_zero() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), [](const APlusSeries& s) { return s.is_zero(); });
}

std::size_t SeriesMatrix::pi_valuation() const noexcept {
  std::size_t v = M_;
  for (const auto& s : entries_) v = std::min(v, s.pi_valuation());
  return v;
}

std::optional<std::size_t> SeriesMatrix::combined_valuation() const noexcept {
  std::optional<std::size_t> best;
  const std::size_t f = static_cast<std::size_t>(ctx_->f());
  for (const auto& s : entries_)
    for (std::size_t k = 0; k < s.order(); ++k)
      for (std::size_t t = 0; t < f; ++t) {
        const u64 c = s.raw(k)[t];
        if (c == 0) continue;
        const std::size_t v = static_cast<std::size_t>(ctx_->valuation(c)) + k;
        if (!best || v < *best) best = v;
      }
  return best;
}

OFMatrix SeriesMatrix::mod_pi() const {
  OFMatrix out(ctx_, rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j).coefficient(0);
  return out;
}

// ---------------------------------------------------------------------------
// Tables and the basic series

WachTables::WachTables(const ContextPtr& ctx, std::size_t M, const mpz_class& c)
    : M_(M),
      c_(c),
      phi_(gamma_pi(ctx, M, ctx->p()), M),
      gamma_(gamma_pi(ctx, M, c), M) {
  if (mpz_divisible_ui_p(c.get_mpz_t(), static_cast<unsigned long>(ctx->p())))
    raise(ErrorKind::NotAUnit, "gamma needs c prime to p, got " + c.get_str());
}

SeriesMatrix WachTables::phi(const SeriesMatrix& m) const {
  return m.map([&](const APlusSeries& s) { return phi_.apply(s, true); });
}

SeriesMatrix WachTables::gamma(const SeriesMatrix& m) const {
  return m.map([&](const APlusSeries& s) { return gamma_.apply(s, false); });
}

namespace {

// gamma_c(pi)/pi = sum_k C(c, k+1) pi^k, a unit.
APlusSeries gamma_ratio(const ContextPtr& ctx, std::size_t M, const mpz_class& c) {
  return exact_div_pi(gamma_pi(ctx, M + 1, c), 1);
}

// Ingredients shared by Q and K at one order.
struct Units {
  APlusSeries q;
  APlusSeries mu;
  APlusSeries q_over_gamma_q;  // q / gamma(q) = phi(v^{-1}) v
  APlusSeries gamma_mu_inv;    // gamma(mu)^{-1}
};

Units units(const ContextPtr& ctx, const WachTables& t) {
  const std::size_t M = t.order();
  APlusSeries v = gamma_ratio(ctx, M, t.c());
  APlusSeries mu = mu_series(ctx, M);
  return Units{q_series(ctx, M), mu, t.phi(invert_series(v)) * v, invert_series(t.gamma(mu))};
}

SeriesMatrix scale_rows(const std::vector<APlusSeries>& diag, const OFMatrix& A, std::size_t M) {
  SeriesMatrix out(A.context(), A.rows(), A.cols(), M);
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) out(i, j) = diag[i] * A(i, j);
  return out;
}

SeriesMatrix scale_cols(const OFMatrix& A, const std::vector<APlusSeries>& diag, std::size_t M) {
  SeriesMatrix out(A.context(), A.rows(), A.cols(), M);
  for (std::size_t i = 0; i < A.rows(); ++i)
    for (std::size_t j = 0; j < A.cols(); ++j) out(i, j) = diag[j] * A(i, j);
  return out;
}

std::size_t default_order(const FilPhiModule& D, std::size_t M) {
  return M != 0 ? M : static_cast<std::size_t>(40 * (D.context()->p() - 1));
}

SeriesMatrix random_start(const ContextPtr& ctx, std::size_t d, std::size_t M, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SeriesMatrix out(ctx, d, d, M);
  const std::size_t f = static_cast<std::size_t>(ctx->f());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t k = 0; k < M; ++k)
        for (std::size_t t = 0; t < f; ++t) out(i, j).raw(k)[t] = rng() % ctx->pN();
  return out;
}

}  // namespace

SeriesMatrix build_P(const FilPhiModule& D, std::size_t M) {
  const auto& ctx = D.context();
  const APlusSeries qmu = q_series(ctx, M) * mu_series(ctx, M);
  std::vector<APlusSeries> diag;
  for (int r : D.jumps()) diag.push_back(qmu.pow(static_cast<unsigned>(r)));
  return scale_rows(diag, D.A(), M);
}

SeriesMatrix compute_Q(const FilPhiModule& D, const mpz_class& c, std::size_t M) {
  const auto& ctx = D.context();
  const std::size_t lift = static_cast<std::size_t>(ctx->p() - 1);
  const std::size_t Mw = M + lift;
  WachTables t(ctx, Mw, c);
  Units u = units(ctx, t);
  // rho = q mu / gamma(q mu)
  const APlusSeries rho = u.q_over_gamma_q * u.mu * u.gamma_mu_inv;
  std::vector<APlusSeries> diag;
  for (int r : D.jumps()) diag.push_back(rho.pow(static_cast<unsigned>(r)));
  const OFMatrix Ainv = D.A().inverse();
  SeriesMatrix X = SeriesMatrix::constant(Ainv, Mw) * scale_rows(diag, D.A(), Mw) - SeriesMatrix::identity(ctx, D.rank(), Mw);
  if (X.pi_valuation() < lift)
    raise(ErrorKind::CongruenceFailure, "gamma(P^-1) P differs from Id at pi^" + std::to_string(X.pi_valuation()));
  return X.map([&](const APlusSeries& s) { return exact_div_pi(s, lift); });
}

SeriesMatrix gamma_P_inverse_scaled(const FilPhiModule& D, const WachTables& t) {
  const auto& ctx = D.context();
  const std::size_t M = t.order();
  const unsigned top = static_cast<unsigned>(ctx->p() - 1);
  Units u = units(ctx, t);
  std::vector<APlusSeries> diag;
  for (int r : D.jumps()) {
    const unsigned ur = static_cast<unsigned>(r);
    diag.push_back(u.q.pow(top - ur) * (u.q_over_gamma_q * u.gamma_mu_inv).pow(ur));
  }
  return scale_cols(D.A().inverse(), diag, M);
}

SeriesMatrix solve_H(const FilPhiModule& D, const mpz_class& c, const WachOptions& opts, std::size_t* iterations) {
  const auto& ctx = D.context();
  const std::size_t M = default_order(D, opts.M);
  const std::size_t d = D.rank();
  WachTables t(ctx, M, c);
  const SeriesMatrix Q = compute_Q(D, c, M);
  const SeriesMatrix K = gamma_P_inverse_scaled(D, t);
  const SeriesMatrix P = build_P(D, M);

  SeriesMatrix H = opts.start_seed ? random_start(ctx, d, M, *opts.start_seed) : SeriesMatrix(ctx, d, d, M);
  const std::size_t window = d * static_cast<std::size_t>(ctx->f()) * static_cast<std::size_t>(ctx->N());
  std::size_t best = 0;
  std::size_t since_best = 0;
  std::size_t n = 0;
  while (true) {
    SeriesMatrix next = Q + K * t.phi(H) * P;
    ++n;
    auto v = (next - H).combined_valuation();
    H = std::move(next);
    if (!v) break;
    if (*v > best || n == 1) {
      best = *v;
      since_best = 0;
    } else if (++since_best >= window) {
      raise(ErrorKind::NonConvergence, "residual valuation stuck at " + std::to_string(best) + " for " +
                                           std::to_string(window) + " iterations");
    }
  }
  if (iterations) *iterations = n;
  return H;
}

SeriesMatrix relation_residual(const WachData& W) {
  WachTables t(W.D.context(), W.M, W.c);
  return t.gamma(W.P) * W.G - t.phi(W.G) * W.P;
}

WachData gamma_matrix(const FilPhiModule& D, const mpz_class& c, const WachOptions& opts) {
  const auto& ctx = D.context();
  const std::size_t M = default_order(D, opts.M);
  WachOptions o = opts;
  o.M = M;
  std::size_t iterations = 0;
  SeriesMatrix H = solve_H(D, c, o, &iterations);
  SeriesMatrix G = SeriesMatrix::identity(ctx, D.rank(), M) + H.shift_up(static_cast<std::size_t>(ctx->p() - 1));
  WachData W{D, c, M, build_P(D, M), compute_Q(D, c, M), std::move(H), std::move(G), 0, iterations};
  W.residual_valuation = relation_residual(W).pi_valuation();
  return W;
}

bool check_cocycle(const FilPhiModule& D, const mpz_class& c1, const mpz_class& c2, const WachOptions& opts) {
  const WachData g1 = gamma_matrix(D, c1, opts);
  const WachData g2 = gamma_matrix(D, c2, opts);
  const WachData g12 = gamma_matrix(D, c1 * c2, opts);
  WachTables t1(D.context(), g1.M, c1);
  WachTables t2(D.context(), g1.M, c2);
  return g12.G == t2.gamma(g1.G) * g2.G && g12.G == t1.gamma(g2.G) * g1.G;
}

bool check_q_cokernel(const WachData& W) {
  const auto& ctx = W.D.context();
  const std::size_t M = W.M;
  const APlusSeries q = q_series(ctx, M);
  const APlusSeries mu_inv = invert_series(mu_series(ctx, M));
  const int top = W.D.r_max();
  std::vector<APlusSeries> diag;
  for (int r : W.D.jumps())
    diag.push_back(q.pow(static_cast<unsigned>(top - r)) * mu_inv.pow(static_cast<unsigned>(r)));
  SeriesMatrix X = scale_cols(W.D.A().inverse(), diag, M);
  SeriesMatrix target = SeriesMatrix::identity(ctx, W.D.rank(), M).map(
      [&](const APlusSeries& s) { return s * q.pow(static_cast<unsigned>(top)); });
  return W.P * X == target;
}

TiResult apply_Ti(const WachData& W, int i) {
  const auto& ctx = W.D.context();
  if (i < 1 || i > ctx->p() - 1) raise(ErrorKind::InvalidArgument, "T_i needs 1 <= i <= p-1");
  const OFElement cinv = OFElement::from_mpz(ctx, W.c).inverse();
  // Coefficients of prod_{k=1}^{i-1} (1 - c^{-k} X), low to high.
  std::vector<OFElement> b{OFElement::from_integer(ctx, 1)};
  OFElement ck = OFElement::from_integer(ctx, 1);
  for (int k = 1; k < i; ++k) {
    ck *= cinv;
    std::vector<OFElement> next(b.size() + 1, OFElement(ctx));
    for (std::size_t m = 0; m < b.size(); ++m) {
      next[m] += b[m];
      next[m + 1] -= b[m] * ck;
    }
    b = std::move(next);
  }
  WachTables t(ctx, W.M, W.c);
  const std::size_t d = W.D.rank();
  SeriesMatrix power = SeriesMatrix::identity(ctx, d, W.M);  // G_{c^m}
  SeriesMatrix total(ctx, d, d, W.M);
  OFElement scalar(ctx);
  for (std::size_t m = 0; m < b.size(); ++m) {
    if (m > 0) power = t.gamma(power) * W.G;
    total = total + power * b[m];
    scalar += b[m];
  }
  return TiResult{std::move(total), scalar, scalar.valuation()};
}

}  // namespace wachlab
