#include "doctest.h"

#include <random>

#include "support/poly_oracle.hpp"
#include "support/random.hpp"
#include "wachlab/aplus.hpp"

using namespace wachlab;
using namespace wachlab::testing;

namespace {

APlusSeries ints(const ContextPtr& ctx, std::size_t M, std::vector<std::int64_t> c) {
  return APlusSeries::from_integers(ctx, M, c);
}

}  // namespace

TEST_CASE("phi_series examples") {
  auto ctx = PrecisionContext::create(3, 1, 10);
  CHECK(phi_series(APlusSeries::pi(ctx, 6)) == ints(ctx, 6, {0, 3, 3, 1}));
  CHECK(phi_series(APlusSeries::one(ctx, 6)) == APlusSeries::one(ctx, 6));
  ZPoly phi_pi{0, 3, 3, 1};
  auto expected = to_series(ctx, zmul(phi_pi, phi_pi, 8), 8);
  CHECK(phi_series(ints(ctx, 8, {0, 0, 1})) == expected);
}

TEST_CASE("phi_series agrees with naive composition") {
  std::mt19937_64 rng(21);
  for (int p : {3, 5, 7}) {
    auto ctx = PrecisionContext::create(p, 1, 12);
    const std::size_t M = 25;
    auto image = one_plus_pi_power_minus_one(static_cast<unsigned long>(p), M);
    for (int t = 0; t < 5; ++t) {
      auto s = random_series(rng, ctx, M);
      CHECK(phi_series(s) == to_series(ctx, zcompose(from_series(s), image, M), M));
    }
  }
}

TEST_CASE("gamma_series examples") {
  auto ctx = PrecisionContext::create(3, 1, 10);
  auto pi = APlusSeries::pi(ctx, 6);
  CHECK(gamma_series(pi, 1) == pi);
  CHECK(gamma_series(pi, 2) == ints(ctx, 6, {0, 2, 1}));
  CHECK(gamma_series(pi, 4) == ints(ctx, 6, {0, 4, 6, 4, 1}));
  CHECK_THROWS_AS(gamma_series(pi, 6), Error);

  // Negative exponent: (1+pi)^{-1} - 1 = -pi + pi^2 - ...
  CHECK(gamma_series(pi, -1) == ints(ctx, 6, {0, -1, 1, -1, 1, -1}));
}

TEST_CASE("gamma_series agrees with naive composition") {
  std::mt19937_64 rng(22);
  auto ctx = PrecisionContext::create(5, 1, 10);
  const std::size_t M = 20;
  for (unsigned long c : {2ul, 6ul, 7ul, 26ul}) {
    auto image = one_plus_pi_power_minus_one(c, M);
    auto s = random_series(rng, ctx, M);
    CHECK(gamma_series(s, c) == to_series(ctx, zcompose(from_series(s), image, M), M));
  }
}

TEST_CASE("q and mu") {
  auto c3 = PrecisionContext::create(3, 1, 10);
  CHECK(q_series(c3, 6) == ints(c3, 6, {3, 3, 1}));
  CHECK(mu_series(c3, 5) == ints(c3, 5, {1, -1, 1, -1, 1}));
  auto c5 = PrecisionContext::create(5, 1, 10);
  CHECK(q_series(c5, 8) == ints(c5, 8, {5, 10, 10, 5, 1}));
  auto mu = mu_series(c5, 30);
  CHECK(mu.coefficient(0) == OFElement::from_integer(c5, 1));
  auto q_minus = q_series(c5, 30) - APlusSeries::pi(c5, 30).pow(4);
  CHECK(mu * q_minus == ints(c5, 30, {5}));
  for (int p : {3, 5, 7, 11}) {
    auto ctx = PrecisionContext::create(p, 1, 6);
    auto q = q_series(ctx, 2 * p);
    CHECK(q.coefficient(0) == OFElement::from_integer(ctx, p));
    CHECK(q.coefficient(static_cast<std::size_t>(p - 1)) == OFElement::from_integer(ctx, 1));
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < q.order(); ++i) nonzero += !q.coefficient(i).is_zero();
    CHECK(nonzero == static_cast<std::size_t>(p));
  }
}

TEST_CASE("mu^s q^s = p^s mod pi^(p-1)") {
  for (int p : {3, 5, 7}) {
    auto ctx = PrecisionContext::create(p, 1, 20);
    const std::size_t M = static_cast<std::size_t>(p - 1);
    auto qmu = q_series(ctx, M) * mu_series(ctx, M);
    for (unsigned s = 0; s <= static_cast<unsigned>(p - 1); ++s) {
      mpz_class ps;
      mpz_ui_pow_ui(ps.get_mpz_t(), static_cast<unsigned long>(p), s);
      CHECK(qmu.pow(s) == APlusSeries::constant(OFElement::from_mpz(ctx, ps), M));
    }
  }
}

TEST_CASE("exact_div_pi and invert_series") {
  auto ctx = PrecisionContext::create(3, 1, 10);
  auto s = ints(ctx, 6, {0, 0, 1, 3});
  auto d = exact_div_pi(s, 2);
  CHECK(d.order() == 4);
  CHECK(d == ints(ctx, 4, {1, 3}));
  try {
    exact_div_pi(APlusSeries::pi(ctx, 6), 2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ExactDivisionFailure);
  }
  CHECK(invert_series(ints(ctx, 5, {1, 1})) == ints(ctx, 5, {1, -1, 1, -1, 1}));
  CHECK_THROWS_AS(invert_series(ints(ctx, 5, {3, 1})), Error);

  std::mt19937_64 rng(23);
  for (int f : {1, 2}) {
    auto c = PrecisionContext::create(5, f, 8);
    auto u = random_series(rng, c, 40);
    u.set_coefficient(0, random_unit(rng, c));
    CHECK(u * invert_series(u) == APlusSeries::one(c, 40));
  }
}

TEST_CASE("multiplication matches naive product") {
  std::mt19937_64 rng(24);
  auto ctx = PrecisionContext::create(7, 1, 20);
  for (int t = 0; t < 10; ++t) {
    auto a = random_series(rng, ctx, 60);
    auto b = random_series(rng, ctx, 60);
    CHECK(a * b == to_series(ctx, zmul(from_series(a), from_series(b), 60), 60));
  }
}

TEST_CASE("phi and gamma commute, group law, homomorphism") {
  std::mt19937_64 rng(25);
  for (int f : {1, 2}) {
    auto ctx = PrecisionContext::create(3, f, 8);
    const std::size_t M = 20;
    for (int t = 0; t < 10; ++t) {
      auto s = random_series(rng, ctx, M);
      auto u = random_series(rng, ctx, M);
      const long c1 = 1 + 3 * static_cast<long>(rng() % 5);
      const long c2 = static_cast<long>(rng() % 2 ? 2 : 4);
      CHECK(phi_series(gamma_series(s, c1)) == gamma_series(phi_series(s), c1));
      CHECK(gamma_series(gamma_series(s, c2), c1) == gamma_series(s, c1 * c2));
      CHECK(gamma_series(s, 1) == s);
      CHECK(phi_series(s * u) == phi_series(s) * phi_series(u));
      CHECK(gamma_series(s * u, c1) == gamma_series(s, c1) * gamma_series(u, c1));
    }
  }
  auto ctx = PrecisionContext::create(3, 1, 8);
  auto q = q_series(ctx, 20);
  auto pi = APlusSeries::pi(ctx, 20);
  CHECK(phi_series(q * pi) == phi_series(q) * phi_series(pi));
}
