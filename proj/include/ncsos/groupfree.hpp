// Group algebras of free products of finite cyclic groups: reduced words,
// extent, spectral projections, the Boca map and its splitting, evaluation at
// unitary tuples, and Naimark dilation of POVM tuples.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "ncsos/ncpoly.hpp"
#include "ncsos/rng.hpp"

namespace ncsos::groupfree {

// W = Z_{n_1} * ... * Z_{n_m}.
struct FreeProductSignature {
  std::vector<int> factors;

  explicit FreeProductSignature(std::vector<int> n);
  FreeProductSignature() = default;

  int num_factors() const { return static_cast<int>(factors.size()); }
  int order(int i) const { return factors[static_cast<std::size_t>(i - 1)]; }  // 1-based
  Complex root(int i) const;              // primitive n_i-th root of unity
  Complex root_power(int i, long m) const;  // omega_i^m, exactly periodic
  int povm_variables() const;  // g = sum (n_i - 1)
  // Flat index of y_{i,j} (1-based in both i and j) into 1..g.
  int variable_index(int i, int j) const;
  bool operator==(const FreeProductSignature& o) const { return factors == o.factors; }
};

// Reduced word: syllables (factor, exponent) with 1 <= exponent < n_factor and
// adjacent factors distinct; empty = identity.
struct GroupWord {
  std::vector<std::pair<int, int>> syllables;

  int extent() const { return static_cast<int>(syllables.size()); }
  int total_degree() const;  // display statistic only
  bool operator==(const GroupWord& o) const { return syllables == o.syllables; }
};

// Order: by extent, then lexicographically on syllables; canonical everywhere.
struct GroupWordLess {
  bool operator()(const GroupWord& a, const GroupWord& b) const {
    if (a.syllables.size() != b.syllables.size()) return a.syllables.size() < b.syllables.size();
    return a.syllables < b.syllables;
  }
};

GroupWord reduce_concat(const FreeProductSignature& sig, const GroupWord& a, const GroupWord& b);
GroupWord group_word_adjoint(const FreeProductSignature& sig, const GroupWord& w);
std::string group_word_to_string(const GroupWord& w);

class GroupPoly {
 public:
  GroupPoly() = default;
  GroupPoly(FreeProductSignature sig, int rows, int cols);

  static GroupPoly identity(const FreeProductSignature& sig, int dim);
  static GroupPoly generator_power(const FreeProductSignature& sig, int factor, int exponent, int dim = 1);

  const FreeProductSignature& signature() const { return sig_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int coeff_dim() const;
  const std::map<GroupWord, CMat, GroupWordLess>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int extent() const;
  int total_degree() const;
  void add_term(const GroupWord& w, const CMat& c);
  CMat coefficient(const GroupWord& w) const;
  GroupPoly pruned(double eps = 1e-14) const;
  double max_coeff_norm() const;
  bool is_hermitian(double tol = 0.0) const;

  GroupPoly operator+(const GroupPoly& q) const;
  GroupPoly operator-(const GroupPoly& q) const;
  GroupPoly operator*(Complex s) const;
  GroupPoly operator*(const GroupPoly& q) const;
  GroupPoly adjoint() const;
  GroupPoly left_mul(const CMat& a) const;

  // p(U) = sum P_w (x) U^w for a unitary tuple with U_i^{n_i} = I.
  CMat evaluate(const std::vector<CMat>& U) const;

 private:
  FreeProductSignature sig_;
  int rows_ = 1;
  int cols_ = 1;
  std::map<GroupWord, CMat, GroupWordLess> terms_;
};

// q_k = (1/n) sum_j w^{-jk} x^j for k = 1..n; minimal central projections of C[Z_n].
std::vector<GroupPoly> spectral_projections(int n);

// The spectral projection p_{i,j} inside the full signature.
GroupPoly spectral_projection(const FreeProductSignature& sig, int i, int j, int dim = 1);

// Boca map Omega: C[W] -> povm(n_bar) realized on polynomials; the image lives
// in the free variables y_{i,j}, one per spectral projection, flat-indexed by
// FreeProductSignature::variable_index.
NCPoly omega_map(const GroupPoly& p);

// The splitting *-homomorphism s with s(y_{i,j}) = p_{i,j}; s(Omega(z)) = z.
GroupPoly split_map(const NCPoly& f, const FreeProductSignature& sig);

struct UnitaryTuple {
  FreeProductSignature sig;
  std::vector<CMat> U;
};

// POVM tuple E_{i,j} >= 0 with sum_j E_{i,j} <= I per factor, stored flat in
// variable order (matches the povm pencil variables).
struct PovmTuple {
  FreeProductSignature sig;
  std::vector<CMat> E;

  double validity_margin() const;  // min over the psd/order conditions
};

UnitaryTuple sample_unitary_tuple(const FreeProductSignature& sig, int l, std::uint64_t seed);

// Verifies U_i^{n_i} = I within tol.
double unitary_tuple_defect(const UnitaryTuple& U);

struct NaimarkDilation {
  UnitaryTuple U;
  CMat V;  // isometry from the original space into the dilation space
};

// Sequential per-factor dilation; V* p_{i,j}(U) V = E_{i,j}.  POVM defects
// down to -1e-8 are clamped.
NaimarkDilation naimark_dilate(const PovmTuple& E);

}  // namespace ncsos::groupfree
