#include "doctest.h"

#include <cmath>
#include <random>

#include "support/random.hpp"
#include "wachlab/padic_core.hpp"

using namespace wachlab;
using wachlab::testing::random_element;
using wachlab::testing::random_invertible;
using wachlab::testing::random_matrix;

namespace {

// Cofactor expansion over Z / p^N, f = 1 only.
u64 laplace_det(const OFMatrix& m) {
  const auto& ctx = m.context();
  const std::size_t n = m.rows();
  if (n == 1) return m(0, 0).coefficient(0);
  u64 acc = 0;
  for (std::size_t j = 0; j < n; ++j) {
    OFMatrix minor(ctx, n - 1, n - 1);
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t k = 0, kk = 0; k < n; ++k) {
        if (k == j) continue;
        minor(i - 1, kk++) = m(i, k);
      }
    const u64 term = ctx->mul(m(0, j).coefficient(0), laplace_det(minor));
    acc = j % 2 == 0 ? ctx->add(acc, term) : ctx->sub(acc, term);
  }
  return acc;
}

u64 powmod(u64 b, u64 e, u64 m) {
  u128 r = 1, x = b % m;
  for (; e; e >>= 1) {
    if (e & 1) r = r * x % m;
    x = x * x % m;
  }
  return static_cast<u64>(r);
}

}  // namespace

TEST_CASE("context validation") {
  CHECK_THROWS_AS(PrecisionContext::create(2, 1, 4), Error);
  CHECK_THROWS_AS(PrecisionContext::create(9, 1, 4), Error);
  CHECK_THROWS_AS(PrecisionContext::create(3, 1, 60), Error);
  CHECK_THROWS_AS(PrecisionContext::create(5, 2, 4, {1, 0, 1}), Error);  // X^2+1 splits mod 5
  auto ctx = PrecisionContext::create(3, 2, 4);
  CHECK(ctx->modulus_integers().size() == 3);
  CHECK(ctx->modulus_integers().back() == 1);
}

TEST_CASE("frobenius f=1 is the identity") {
  auto ctx = PrecisionContext::create(3, 1, 4);
  auto x = OFElement::from_integer(ctx, 7);
  CHECK(frobenius(x) == x);
}

TEST_CASE("frobenius lift f=2") {
  auto ctx = PrecisionContext::create(3, 2, 6);
  std::vector<std::int64_t> xc{0, 1};
  auto x = OFElement::from_coefficients(ctx, xc);
  auto sx = frobenius(x);
  auto xp = x.pow(3);
  CHECK((sx - xp).valuation() >= 1);
  // sigma(X) is a root of the modulus.
  OFElement g(ctx);
  const auto& m = ctx->modulus_integers();
  for (std::size_t k = m.size(); k-- > 0;) g = g * sx + OFElement::from_integer(ctx, m[k]);
  CHECK(g.is_zero());

  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    auto y = random_element(rng, ctx);
    CHECK(frobenius(frobenius(y)) == y);
  }
}

TEST_CASE("frobenius is a ring homomorphism") {
  std::mt19937_64 rng(12);
  for (int f : {1, 2, 3}) {
    auto ctx = PrecisionContext::create(5, f, 7);
    for (int t = 0; t < 1000; ++t) {
      auto a = random_element(rng, ctx);
      auto b = random_element(rng, ctx);
      CHECK(frobenius(a + b) == frobenius(a) + frobenius(b));
      CHECK(frobenius(a * b) == frobenius(a) * frobenius(b));
    }
    auto y = random_element(rng, ctx);
    CHECK(frobenius_power(y, f) == y);
  }
}

TEST_CASE("teichmuller") {
  auto c3 = PrecisionContext::create(3, 1, 4);
  CHECK(teichmuller(c3, 2).coefficient(0) == 80);
  auto c5 = PrecisionContext::create(5, 1, 3);
  CHECK(teichmuller(c5, 1).coefficient(0) == 1);
  CHECK_THROWS_AS(teichmuller(c5, 10), Error);

  auto c54 = PrecisionContext::create(5, 1, 4);
  u64 x = 2;
  for (int i = 0; i < 10; ++i) x = powmod(x, 5, 625);
  CHECK(teichmuller(c54, 2).coefficient(0) == x);

  for (int f : {1, 2}) {
    auto ctx = PrecisionContext::create(7, f, 5);
    auto w = teichmuller(ctx, 3);
    mpz_class order = 1;
    for (int i = 0; i < f; ++i) order *= 7;
    CHECK(w.pow(order - 1) == OFElement::from_integer(ctx, 1));
    CHECK((w - OFElement::from_integer(ctx, 3)).valuation() >= 1);
  }
}

TEST_CASE("inverse and exact division") {
  std::mt19937_64 rng(5);
  auto ctx = PrecisionContext::create(3, 2, 8);
  for (int t = 0; t < 100; ++t) {
    auto a = random_element(rng, ctx);
    if (!a.is_unit()) {
      CHECK_THROWS_AS(a.inverse(), Error);
      continue;
    }
    CHECK(a * a.inverse() == OFElement::from_integer(ctx, 1));
  }
  auto nine = OFElement::from_integer(ctx, 18);
  auto q = nine.exact_divide_p_power(2);
  CHECK(q.context()->N() == 6);
  CHECK(q.coefficient(0) == 2);
  try {
    nine.exact_divide_p_power(3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ExactDivisionFailure);
  }
}

TEST_CASE("determinant matches cofactor expansion") {
  std::mt19937_64 rng(6);
  auto ctx = PrecisionContext::create(5, 1, 8);
  for (std::size_t n = 1; n <= 5; ++n)
    for (int t = 0; t < 20; ++t) {
      auto m = random_matrix(rng, ctx, n, n);
      CHECK(m.determinant().coefficient(0) == laplace_det(m));
    }
}

TEST_CASE("matrix inverse") {
  std::mt19937_64 rng(7);
  for (int f : {1, 2}) {
    auto ctx = PrecisionContext::create(3, f, 6);
    auto m = random_invertible(rng, ctx, 4);
    CHECK(m * m.inverse() == OFMatrix::identity(ctx, 4));
  }
  auto ctx = PrecisionContext::create(3, 1, 6);
  auto singular = OFMatrix::from_integers(ctx, {{3, 0}, {0, 1}});
  CHECK_THROWS_AS(singular.inverse(), Error);
}

TEST_CASE("smith normal form examples") {
  auto c35 = PrecisionContext::create(3, 1, 5);
  auto s = smith_normal_form(OFMatrix::from_integers(c35, {{2, 0}, {0, 3}}));
  REQUIRE(s.exponents.size() == 2);
  CHECK(s.exponents[0] == 0);
  CHECK(s.exponents[1] == 1);

  auto r = smith_normal_form(OFMatrix::from_integers(c35, {{3, 3}, {3, 3}}));
  CHECK(r.rank == 1);
  CHECK(r.exponents[0] == 1);
  CHECK(!r.exponents[1].has_value());
  CHECK_THROWS_AS(r.total_exponent(2), Error);
  CHECK(r.total_exponent(1) == 1);
}

TEST_CASE("smith normal form reconstruction and invariance") {
  std::mt19937_64 rng(8);
  auto ctx = PrecisionContext::create(5, 1, 8);
  for (int t = 0; t < 50; ++t) {
    auto m = random_matrix(rng, ctx, 3, 3);
    // Force nontrivial divisors on some draws.
    if (t % 2) m = m * OFMatrix::from_integers(ctx, {{1, 0, 0}, {0, 5, 0}, {0, 0, 25}});
    auto s = smith_normal_form(m);
    CHECK(s.U * m * s.V == s.D);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        if (i != j) CHECK(s.D(i, j).is_zero());
    CHECK(s.U.determinant().is_unit());
    CHECK(s.V.determinant().is_unit());
    auto g = random_invertible(rng, ctx, 3);
    auto h = random_invertible(rng, ctx, 3);
    CHECK(smith_normal_form(g * m * h).exponents == s.exponents);
  }
  auto rect = random_matrix(rng, ctx, 2, 4);
  auto s = smith_normal_form(rect);
  CHECK(s.U * rect * s.V == s.D);
}

TEST_CASE("newton slopes") {
  auto ctx = PrecisionContext::create(3, 1, 10);
  auto s1 = newton_slopes(OFMatrix::from_integers(ctx, {{1, 0}, {0, 3}}));
  CHECK(s1 == std::vector<mpq_class>{0, 1});
  auto s2 = newton_slopes(OFMatrix::from_integers(ctx, {{0, 1}, {3, 0}}));
  CHECK(s2 == std::vector<mpq_class>{mpq_class(1, 2), mpq_class(1, 2)});
  CHECK_THROWS_AS(newton_slopes(OFMatrix::from_integers(ctx, {{1, 0}, {0, 0}})), Error);

  std::mt19937_64 rng(9);
  auto c5 = PrecisionContext::create(5, 1, 20);
  for (int t = 0; t < 40; ++t) {
    auto a = random_invertible(rng, c5, 3);
    std::vector<OFElement> diag;
    int total = 0;
    for (int i = 0; i < 3; ++i) {
      const int r = static_cast<int>(rng() % 4);
      total += r;
      diag.push_back(OFElement::from_mpz(c5, mpz_class(1) * static_cast<long>(std::pow(5, r))));
    }
    auto phi = OFMatrix::diagonal(diag) * a;
    auto slopes = newton_slopes(phi);
    mpq_class sum = 0;
    for (auto& x : slopes) sum += x;
    CHECK(sum == total);
    CHECK(phi.determinant().valuation() == total);
    std::size_t zeros = 0;
    for (auto& x : slopes) zeros += (x == 0);
    CHECK(semilinear_stable_rank(phi) == zeros);
  }
}

TEST_CASE("newton slopes f=2 divide by f") {
  auto ctx = PrecisionContext::create(3, 2, 10);
  auto m = OFMatrix::from_integers(ctx, {{3}});
  CHECK(newton_slopes(m) == std::vector<mpq_class>{1});
  auto n = OFMatrix::from_integers(ctx, {{0, 1}, {3, 0}});
  CHECK(newton_slopes(n) == std::vector<mpq_class>{mpq_class(1, 2), mpq_class(1, 2)});
}

TEST_CASE("stable rank examples") {
  auto ctx = PrecisionContext::create(3, 1, 4);
  CHECK(semilinear_stable_rank(OFMatrix::from_integers(ctx, {{1, 0}, {0, 0}})) == 1);
  CHECK(semilinear_stable_rank(OFMatrix::from_integers(ctx, {{0, 1}, {0, 0}})) == 0);
  CHECK(semilinear_stable_rank(OFMatrix::from_integers(ctx, {{0, 1}, {3, 0}})) == 0);
  CHECK(semilinear_stable_rank(OFMatrix::from_integers(ctx, {{2, 1}, {1, 2}})) == 1);
}

namespace {

RationalMatrix from_ints(const std::vector<std::vector<long>>& rows) {
  RationalMatrix m;
  for (auto& r : rows) {
    std::vector<mpq_class> row;
    for (long v : r) row.emplace_back(v);
    m.push_back(row);
  }
  return m;
}

}  // namespace

TEST_CASE("semisimplicity") {
  CHECK_FALSE(is_semisimple_at(from_ints({{1, 1}, {0, 1}}), 1));
  CHECK(is_semisimple_at(from_ints({{1, 0}, {0, 1}}), 1));

  // Conjugates of a Jordan matrix: blocks (2;size 2), (2;size 1), (5;size 1).
  // The oracle is the block structure itself.
  auto jordan = from_ints({{2, 1, 0, 0}, {0, 2, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 5}});
  auto diagonal = from_ints({{2, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 3, 0}, {0, 0, 0, 5}});
  std::mt19937_64 rng(10);
  for (int t = 0; t < 20; ++t) {
    RationalMatrix s, sinv;
    while (true) {
      s = RationalMatrix(4, std::vector<mpq_class>(4));
      for (auto& row : s)
        for (auto& v : row) v = static_cast<long>(rng() % 7) - 3;
      if (rational_rank(s) == 4) break;
    }
    // Inverse by Gauss-Jordan on the augmented matrix.
    RationalMatrix aug(4, std::vector<mpq_class>(8));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        aug[i][j] = s[i][j];
        aug[i][4 + j] = (i == j);
      }
    for (int k = 0; k < 4; ++k) {
      int piv = k;
      while (aug[piv][k] == 0) ++piv;
      std::swap(aug[k], aug[piv]);
      mpq_class inv = 1 / aug[k][k];
      for (auto& v : aug[k]) v *= inv;
      for (int i = 0; i < 4; ++i)
        if (i != k && aug[i][k] != 0) {
          mpq_class fct = aug[i][k];
          for (int j = 0; j < 8; ++j) aug[i][j] -= fct * aug[k][j];
        }
    }
    sinv = RationalMatrix(4, std::vector<mpq_class>(4));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) sinv[i][j] = aug[i][4 + j];
    auto mj = rational_multiply(rational_multiply(s, jordan), sinv);
    CHECK_FALSE(is_semisimple_at(mj, 2));
    CHECK(is_semisimple_at(mj, 5));
    CHECK(is_semisimple_at(mj, 7));
    auto md = rational_multiply(rational_multiply(s, diagonal), sinv);
    CHECK(is_semisimple_at(md, 2));
    CHECK(is_semisimple_at(md, 3));
  }
}

TEST_CASE("rational valuation") {
  CHECK(rational_valuation(mpq_class(18, 5), 3) == 2);
  CHECK(rational_valuation(mpq_class(2, 27), 3) == -3);
}
