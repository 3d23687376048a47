#pragma once

// Tamagawa numbers and the C_EP determinant calculus, by p-adic valuations.
// Only F = Q_p (f = 1) is supported.

#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "wachlab/filmod.hpp"

namespace wachlab {

struct GammaStarValue {
  int j = 0;
  mpq_class value;
  int vp = 0;
};

/// (j-1)! for j >= 1, (-1)^j / (-j)! for j <= 0; vp by Legendre's formula.
GammaStarValue gamma_star(int j, int p);
/// v_p(Gamma*(-j)) == 0 for every j in [a, b].
bool gamma_star_window_unit(int a, int b, int p);

/// A rational lattice map p^scale * matrix, matrix integral.
struct LatticeMap {
  OFMatrix matrix;
  int scale = 0;
  std::string domain;
  std::string codomain;
};

/// Maps f_0, f_1, ... of 0 -> L_0 -> L_1 -> ... -> 0, exact after inverting p.
struct ExactSequenceLadder {
  std::vector<LatticeMap> maps;
};

/// sum_i (-1)^i v(f_i), where v sums the elementary divisors (scale included).
/// NotExact on a nonzero composite or inconsistent ranks.
int exact_sequence_exponent(const ExactSequenceLadder& ladder);

struct DetValue {
  OFElement scaled;  // the determinant is p^scale * scaled
  int scale = 0;
  std::optional<int> vp;  // nullopt: zero at precision
};
/// det(1 - phi) of the represented object.
DetValue det_one_minus_phi(const FilPhiModule& D);
/// det(1 - phi | D_cris(V*(1))) = det(1 - p^{-1} phi^{-1}), the obstruction on the dual side.
DetValue det_one_minus_phi_dual(const FilPhiModule& D);

struct PAdicNumber {
  int vp = 0;
  OFElement unit;
};
/// det(-phi | D_cris(V*(1))) = (-1)^d p^{-d} / det(phi).
PAdicNumber det_minus_phi_dual(const FilPhiModule& D);

/// 0 for the Fontaine-Laffaille lattice; rescaling omega by p^{k_i} on factor i adds k_i.
int eta_exponent(const FilPhiModule& D, const std::vector<int>& scalings = {});

/// Tamagawa data for one module.
struct TamagawaReport {
  int exponent = 0;      // v_p(Tam^0_p)
  int sequence = 0;      // exponent of 0 -> M -> M + t(M) -> H^1_f/tors -> 0
  int torsion = 0;       // length of the torsion of M / (1 - phi) Fil^0 M
  std::size_t tangent_rank = 0;
  ExactSequenceLadder ladder;
};

/// Degenerate when det(1 - phi) on D or on its dual twist vanishes at precision, or
/// when the weights together with {0, 1} do not fit in a window of length p-1.
TamagawaReport tamagawa(const FilPhiModule& D);
int tam_exponent(const FilPhiModule& D);

struct CepReport {
  int tam_exponent_V = 0;
  int tam_exponent_dual = 0;
  int det_minus_phi_dual_vp = 0;
  int gamma_star_total_vp = 0;
  int eta_exponent = 0;
  int cep_lattice_exponent = 0;  // Gamma*-form
  int tam_form_exponent = 0;     // Tamagawa-ratio form
  bool verdict = false;
};

/// -sum_i v_p(Gamma*(-r_i)) over the actual jumps.
int gamma_star_total_vp(const FilPhiModule& D);
CepReport cep_check(const FilPhiModule& D);

}  // namespace wachlab
