#pragma once

// Naive integer power-series arithmetic used as an independent reference.

#include <cstddef>
#include <vector>

#include <gmpxx.h>

#include "wachlab/aplus.hpp"

namespace wachlab::testing {

using ZPoly = std::vector<mpz_class>;

inline ZPoly zmul(const ZPoly& a, const ZPoly& b, std::size_t M) {
  ZPoly out(M, 0);
  for (std::size_t i = 0; i < a.size() && i < M; ++i)
    for (std::size_t j = 0; j < b.size() && i + j < M; ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline ZPoly zadd(const ZPoly& a, const ZPoly& b) {
  ZPoly out(std::max(a.size(), b.size()), 0);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

// s(image) by Horner, truncated at M.
inline ZPoly zcompose(const ZPoly& s, const ZPoly& image, std::size_t M) {
  ZPoly acc(M, 0);
  for (std::size_t i = s.size(); i-- > 0;) {
    acc = zmul(acc, image, M);
    acc[0] += s[i];
  }
  return acc;
}

// (1+pi)^c - 1 for c >= 0 by repeated multiplication.
inline ZPoly one_plus_pi_power_minus_one(unsigned long c, std::size_t M) {
  ZPoly base{1, 1};
  ZPoly acc{1};
  for (unsigned long i = 0; i < c; ++i) acc = zmul(acc, base, M);
  acc.resize(M, 0);
  acc[0] -= 1;
  return acc;
}

inline APlusSeries to_series(const ContextPtr& ctx, const ZPoly& z, std::size_t M) {
  APlusSeries s(ctx, M);
  for (std::size_t i = 0; i < z.size() && i < M; ++i) s.set_coefficient(i, OFElement::from_mpz(ctx, z[i]));
  return s;
}

inline ZPoly from_series(const APlusSeries& s) {
  ZPoly z(s.order());
  for (std::size_t i = 0; i < s.order(); ++i) z[i] = static_cast<unsigned long>(s.raw(i)[0]);
  return z;
}

}  // namespace wachlab::testing
