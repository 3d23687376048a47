#include "wachlab/cep.hpp"

#include <algorithm>
#include <numeric>

namespace wachlab {

namespace {

int legendre(long n, int p) {
  int v = 0;
  for (long q = n / p; q > 0; q /= p) v += static_cast<int>(q);
  return v;
}

OFElement p_power_element(const ContextPtr& ctx, int e) {
  mpz_class v;
  mpz_ui_pow_ui(v.get_mpz_t(), static_cast<unsigned long>(ctx->p()), static_cast<unsigned long>(e));
  return OFElement::from_mpz(ctx, v);
}

void require_qp(const FilPhiModule& D) {
  if (D.context()->f() != 1) raise(ErrorKind::InvalidArgument, "only F = Q_p (f = 1) is supported here");
}

// Sum of elementary divisors of the integral part, requiring the given rank.
int divisor_sum(const OFMatrix& m, std::size_t rank, const std::string& label) {
  if (rank == 0) return 0;
  SmithForm s = smith_normal_form(m);
  if (s.rank < rank)
    raise(ErrorKind::PrecisionLoss, label + ": rank " + std::to_string(s.rank) + " at precision, expected " +
                                        std::to_string(rank));
  return s.total_exponent(rank);
}

std::size_t rank_at_precision(const OFMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  return smith_normal_form(m).rank;
}

// p^{-k} P with k = min(0, min J), integral.
struct Scaled {
  int k = 0;
  OFMatrix Pint;
};

Scaled scaled_phi(const FilPhiModule& D) {
  const auto& ctx = D.context();
  const auto J = D.actual_jumps();
  const int k = std::min(0, *std::min_element(J.begin(), J.end()));
  OFMatrix Pint = D.A();
  for (std::size_t i = 0; i < D.rank(); ++i) {
    const OFElement s = p_power_element(ctx, J[i] - k);
    for (std::size_t j = 0; j < D.rank(); ++j) Pint(i, j) *= s;
  }
  return {k, Pint};
}

void check_window(const FilPhiModule& D) {
  const auto ht = D.hodge_tate_weights();
  const int hi = std::max(1, *std::max_element(ht.begin(), ht.end()));
  const int lo = std::min(0, *std::min_element(ht.begin(), ht.end()));
  if (hi - lo > D.context()->p() - 1)
    raise(ErrorKind::Degenerate, "weights with {0, 1} span [" + std::to_string(lo) + ", " + std::to_string(hi) +
                                     "], wider than p-1");
}

}  // namespace

GammaStarValue gamma_star(int j, int p) {
  GammaStarValue out;
  out.j = j;
  mpz_class fact;
  if (j >= 1) {
    mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(j - 1));
    out.value = mpq_class(fact);
    out.vp = legendre(j - 1, p);
  } else {
    mpz_fac_ui(fact.get_mpz_t(), static_cast<unsigned long>(-j));
    out.value = mpq_class(j % 2 == 0 ? 1 : -1, 1) / mpq_class(fact);
    out.vp = -legendre(-j, p);
  }
  out.value.canonicalize();
  return out;
}

bool gamma_star_window_unit(int a, int b, int p) {
  for (int j = a; j <= b; ++j)
    if (gamma_star(-j, p).vp != 0) return false;
  return true;
}

int exact_sequence_exponent(const ExactSequenceLadder& ladder) {
  const auto& maps = ladder.maps;
  if (maps.empty()) return 0;
  std::vector<std::size_t> ranks;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (i + 1 < maps.size()) {
      if (maps[i + 1].matrix.cols() != maps[i].matrix.rows())
        raise(ErrorKind::NotExact, "lattice " + maps[i].codomain + " has inconsistent ranks");
      if (!(maps[i + 1].matrix * maps[i].matrix).is_zero())
        raise(ErrorKind::NotExact, "composite " + maps[i].domain + " -> " + maps[i + 1].codomain + " is nonzero");
    }
    ranks.push_back(rank_at_precision(maps[i].matrix));
  }
  if (ranks.front() != maps.front().matrix.cols())
    raise(ErrorKind::NotExact, "first map out of " + maps.front().domain + " is not injective");
  for (std::size_t i = 0; i + 1 < maps.size(); ++i)
    if (ranks[i] + ranks[i + 1] != maps[i].matrix.rows())
      raise(ErrorKind::NotExact, "sequence is not exact at " + maps[i].codomain);
  if (ranks.back() != maps.back().matrix.rows())
    raise(ErrorKind::NotExact, "last map onto " + maps.back().codomain + " is not surjective");
  int total = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const int v = divisor_sum(maps[i].matrix, ranks[i], maps[i].domain) + maps[i].scale * static_cast<int>(ranks[i]);
    total += i % 2 == 0 ? v : -v;
  }
  return total;
}

DetValue det_one_minus_phi(const FilPhiModule& D) {
  require_qp(D);
  const auto& ctx = D.context();
  const Scaled s = scaled_phi(D);
  const std::size_t d = D.rank();
  const OFMatrix S = OFMatrix::identity(ctx, d) * p_power_element(ctx, -s.k) - s.Pint;
  DetValue out{S.determinant(), s.k * static_cast<int>(d), std::nullopt};
  if (!out.scaled.is_zero()) out.vp = out.scale + out.scaled.valuation();
  return out;
}

DetValue det_one_minus_phi_dual(const FilPhiModule& D) {
  require_qp(D);
  return det_one_minus_phi(dual_twist(D, 1));
}

PAdicNumber det_minus_phi_dual(const FilPhiModule& D) {
  require_qp(D);
  const int d = static_cast<int>(D.rank());
  OFElement unit = D.A().determinant().inverse();
  if (d % 2 == 1) unit = -unit;
  return {-d - hodge_invariants(D).t_H, unit};
}

int eta_exponent(const FilPhiModule& D, const std::vector<int>& scalings) {
  if (scalings.size() > D.rank()) raise(ErrorKind::InvalidArgument, "more scalings than basis vectors");
  return std::accumulate(scalings.begin(), scalings.end(), 0);
}

TamagawaReport tamagawa(const FilPhiModule& D) {
  require_qp(D);
  check_window(D);
  if (!det_one_minus_phi(D).vp) raise(ErrorKind::Degenerate, "det(1 - phi) vanishes at precision: D^{phi=1} may be nonzero");
  if (!det_one_minus_phi_dual(D).vp)
    raise(ErrorKind::Degenerate, "det(1 - phi) on the dual twist vanishes at precision: V*(1) has invariants");

  const auto& ctx = D.context();
  const std::size_t d = D.rank();
  const auto J = D.actual_jumps();
  const Scaled s = scaled_phi(D);
  const OFElement unscale = p_power_element(ctx, -s.k);
  std::vector<std::size_t> fil0, rest;
  for (std::size_t i = 0; i < d; ++i) (J[i] >= 0 ? fil0 : rest).push_back(i);
  const std::size_t m = fil0.size(), t = rest.size();

  // p^{-k} (1 - phi) on column coordinates.
  const OFMatrix S = OFMatrix::identity(ctx, d) * unscale - s.Pint.transpose();
  // (1 - phi) on Fil^0, integral.
  OFMatrix B(ctx, d, m);
  for (std::size_t a = 0; a < m; ++a) {
    const std::size_t j = fil0[a];
    const OFElement w = p_power_element(ctx, J[j]);
    for (std::size_t i = 0; i < d; ++i) B(i, a) = (i == j ? OFElement::from_integer(ctx, 1) : OFElement(ctx)) - D.A()(j, i) * w;
  }
  TamagawaReport out;
  out.tangent_rank = t;
  OFMatrix proj(ctx, t, d);
  if (m > 0) {
    SmithForm snf = smith_normal_form(B);
    out.torsion = snf.total_exponent(m);
    proj = snf.U.submatrix(m, 0, t, d);
  } else {
    proj = OFMatrix::identity(ctx, d);
  }

  OFMatrix Et(ctx, t, d);
  for (std::size_t a = 0; a < t; ++a) Et(a, rest[a]) = OFElement::from_integer(ctx, 1);
  OFMatrix alpha(ctx, d + t, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) alpha(i, j) = S(i, j);
  for (std::size_t a = 0; a < t; ++a)
    for (std::size_t j = 0; j < d; ++j) alpha(d + a, j) = Et(a, j) * unscale;
  const OFMatrix tail = proj * S * Et.transpose();
  OFMatrix beta(ctx, t, d + t);
  for (std::size_t a = 0; a < t; ++a) {
    for (std::size_t j = 0; j < d; ++j) beta(a, j) = proj(a, j) * unscale;
    for (std::size_t b = 0; b < t; ++b) beta(a, d + b) = -tail(a, b);
  }
  out.ladder.maps.push_back(LatticeMap{alpha, s.k, "D_cris(T)", "D_cris(T)+t(T)"});
  out.ladder.maps.push_back(LatticeMap{beta, s.k, "D_cris(T)+t(T)", "H1_f(T)/tors"});
  out.sequence = exact_sequence_exponent(out.ladder);
  // An integral exact sequence with torsion cokernel has total exponent 0,
  // so the torsion enters with the opposite sign to the sequence.
  out.exponent = out.sequence - out.torsion;
  return out;
}

int tam_exponent(const FilPhiModule& D) { return tamagawa(D).exponent; }

int gamma_star_total_vp(const FilPhiModule& D) {
  int total = 0;
  for (int r : D.actual_jumps()) total -= gamma_star(-r, D.context()->p()).vp;
  return total;
}

CepReport cep_check(const FilPhiModule& D) {
  require_qp(D);
  const int p = D.context()->p();
  for (int w : D.hodge_tate_weights())
    if (w < -(p - 2) || w > p - 1)
      raise(ErrorKind::Degenerate, "Hodge-Tate weight " + std::to_string(w) + " outside [-(p-2), p-1]");
  CepReport r;
  r.tam_exponent_V = tam_exponent(D);
  r.tam_exponent_dual = tam_exponent(dual_twist(D, 1));
  r.det_minus_phi_dual_vp = det_minus_phi_dual(D).vp;
  r.gamma_star_total_vp = gamma_star_total_vp(D);
  r.eta_exponent = eta_exponent(D);
  r.cep_lattice_exponent = r.det_minus_phi_dual_vp + r.gamma_star_total_vp + r.eta_exponent;
  r.tam_form_exponent = r.det_minus_phi_dual_vp + r.tam_exponent_V - r.tam_exponent_dual;
  r.verdict = r.cep_lattice_exponent == r.tam_form_exponent;
  return r;
}

}  // namespace wachlab
