#pragma once

// Strongly divisible filtered phi-modules in the Fontaine-Laffaille range.
//
// Row convention throughout: a basis is a column of vectors e, phi(e) = Phi e,
// and for a row vector x of coordinates phi(x) = sigma(x) Phi.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wachlab/padic_core.hpp"

namespace wachlab {

class FilPhiModule {
 public:
  /// jumps sorted ascending in [0, p-1]; A square with unit determinant.
  /// ValidationError otherwise.
  static FilPhiModule create(std::vector<int> jumps, OFMatrix A, int shift = 0);

  const ContextPtr& context() const noexcept { return A_.context(); }
  std::size_t rank() const noexcept { return jumps_.size(); }
  const std::vector<int>& jumps() const noexcept { return jumps_; }
  const OFMatrix& A() const noexcept { return A_; }
  int shift() const noexcept { return shift_; }

  /// Diag(p^{r_1}, ..., p^{r_d}) A, the normalized Frobenius.
  OFMatrix phi_matrix() const;
  /// Filtration jumps of the represented object, r_i + shift.
  std::vector<int> actual_jumps() const;
  /// Hodge-Tate weights, the negatives of the actual jumps.
  std::vector<int> hodge_tate_weights() const;
  int r_max() const { return jumps_.back(); }

 private:
  FilPhiModule(std::vector<int> jumps, OFMatrix A, int shift)
      : jumps_(std::move(jumps)), A_(std::move(A)), shift_(shift) {}

  std::vector<int> jumps_;
  OFMatrix A_;
  int shift_;
};

/// phi in an arbitrary basis; fil[i] has rows generating Fil^i (Fil^i = 0 past the end).
struct RawFilPhiModule {
  OFMatrix Phi;
  std::vector<OFMatrix> fil;
};

struct StrongDivisibility {
  bool strongly_divisible = false;
  std::optional<FilPhiModule> module;  // adapted presentation when divisible
  std::string reason;
};

/// Presents D in the basis b with e = E b (E unimodular): Phi_raw = sigma(E)^{-1} Phi E.
RawFilPhiModule export_raw(const FilPhiModule& D, const OFMatrix& E);

/// D == sum_i p^{-i} phi(Fil^i D), with Fil^i the saturation of its generators.
StrongDivisibility strong_divisibility_check(const RawFilPhiModule& D);

std::size_t unit_root_rank(const FilPhiModule& D);
bool top_slope_absent(const FilPhiModule& D);

/// The module of V*(k) (covariant convention: Q_p(1) has jump -1).
FilPhiModule dual_twist(const FilPhiModule& D, int k);

struct HodgeInvariants {
  std::map<int, int> h;  // jump -> multiplicity
  int t_H = 0;
};
HodgeInvariants hodge_invariants(const FilPhiModule& D);

struct CategoryFlags {
  bool ab_star = false;  // no slope 0 part
  bool a_star_b = false;  // no slope r_d part
  bool both = false;
};
CategoryFlags category_membership(const FilPhiModule& D);

}  // namespace wachlab
