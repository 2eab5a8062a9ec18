// Operator-coefficient noncommutative polynomials over the free monoid.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <optional>
#include <stdexcept>

#include "ncsos/word.hpp"

namespace ncsos {

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;

inline CMat kron(const CMat& a, const CMat& b) {
  CMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// p = sum_w P_w w with P_w a complex rows x cols matrix.  Algebra elements
// are the square case rows == cols == coeff_dim; rectangular coefficients
// appear in certificate factors (rows = rank of a Gram factor).
class NCPoly {
 public:
  NCPoly() = default;
  NCPoly(int g, int rows, int cols) : g_(g), rows_(rows), cols_(cols) {
    // Zero rows or columns encode empty factor lists (rank-0 Gram factors).
    if (g < 1 || rows < 0 || cols < 0) throw std::invalid_argument("NCPoly: bad dimensions");
  }

  static NCPoly zero(int g, int dim) { return NCPoly(g, dim, dim); }

  static NCPoly identity(int g, int dim) {
    NCPoly p(g, dim, dim);
    p.add_term(Word{}, CMat::Identity(dim, dim));
    return p;
  }

  static NCPoly letter(int g, int j, int dim = 1) {
    if (j < 1 || j > g) throw std::invalid_argument("letter index out of range");
    NCPoly p(g, dim, dim);
    p.add_term(Word{j}, CMat::Identity(dim, dim));
    return p;
  }

  static NCPoly constant(int g, const CMat& c) {
    NCPoly p(g, static_cast<int>(c.rows()), static_cast<int>(c.cols()));
    p.add_term(Word{}, c);
    return p;
  }

  int g() const { return g_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }
  int coeff_dim() const {
    if (!square()) throw std::logic_error("coeff_dim of a rectangular polynomial");
    return rows_;
  }

  const std::map<Word, CMat, GradedLexLess>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // Degree of the zero polynomial is the empty optional (standing in for -inf).
  std::optional<int> degree() const {
    if (terms_.empty()) return std::nullopt;
    return static_cast<int>(terms_.rbegin()->first.size());
  }
  int degree_or(int zero_value) const { return degree().value_or(zero_value); }

  void add_term(const Word& w, const CMat& c) {
    check_word(w);
    if (c.rows() != rows_ || c.cols() != cols_) throw std::invalid_argument("NCPoly: coefficient shape mismatch");
    auto it = terms_.find(w);
    if (it == terms_.end()) {
      if (!c.isZero(0.0)) terms_.emplace(w, c);
    } else {
      it->second += c;
      if (it->second.isZero(0.0)) terms_.erase(it);
    }
  }

  CMat coefficient(const Word& w) const {
    auto it = terms_.find(w);
    if (it == terms_.end()) return CMat::Zero(rows_, cols_);
    return it->second;
  }

  // Drops terms with max-norm <= eps.
  NCPoly pruned(double eps = 1e-14) const {
    NCPoly out(g_, rows_, cols_);
    for (const auto& [w, c] : terms_)
      if (c.cwiseAbs().maxCoeff() > eps) out.terms_.emplace(w, c);
    return out;
  }

  double max_coeff_norm() const {
    double m = 0;
    for (const auto& [w, c] : terms_) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
  }

  bool is_hermitian(double tol = 0.0) const {
    if (!square()) return false;
    for (const auto& [w, c] : terms_) {
      CMat other = coefficient(word_reverse(w));
      if ((other - c.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
  }

  NCPoly operator+(const NCPoly& q) const {
    check_compatible(q);
    NCPoly out = *this;
    for (const auto& [w, c] : q.terms_) out.add_term(w, c);
    return out;
  }

  NCPoly operator-(const NCPoly& q) const {
    check_compatible(q);
    NCPoly out = *this;
    for (const auto& [w, c] : q.terms_) out.add_term(w, -c);
    return out;
  }

  NCPoly operator*(Complex s) const {
    NCPoly out(g_, rows_, cols_);
    if (s == Complex(0, 0)) return out;
    for (const auto& [w, c] : terms_) out.terms_.emplace(w, s * c);
    return out;
  }

  // Convolution product; coefficient shapes must chain (this->cols == q.rows).
  NCPoly operator*(const NCPoly& q) const {
    if (g_ != q.g_) throw std::invalid_argument("NCPoly multiply: alphabet mismatch");
    if (cols_ != q.rows_) throw std::invalid_argument("NCPoly multiply: coefficient dimension mismatch");
    NCPoly out(g_, rows_, q.cols_);
    for (const auto& [u, a] : terms_)
      for (const auto& [v, b] : q.terms_) out.add_term(word_concat(u, v), a * b);
    return out;
  }

  // Word reversal plus conjugate transpose of coefficients.
  NCPoly adjoint() const {
    NCPoly out(g_, cols_, rows_);
    for (const auto& [w, c] : terms_) out.add_term(word_reverse(w), c.adjoint());
    return out;
  }

  // Left/right multiplication of every coefficient by a fixed matrix.
  NCPoly left_mul(const CMat& a) const {
    if (a.cols() != rows_) throw std::invalid_argument("left_mul: shape mismatch");
    NCPoly out(g_, static_cast<int>(a.rows()), cols_);
    for (const auto& [w, c] : terms_) out.add_term(w, a * c);
    return out;
  }

  // Multiplies every term's word by the single letter x_j on the left.
  NCPoly shift_letter(int j) const {
    if (j < 1 || j > g_) throw std::invalid_argument("shift_letter: letter out of range");
    NCPoly out(g_, rows_, cols_);
    for (const auto& [w, c] : terms_) {
      Word sw;
      sw.reserve(w.size() + 1);
      sw.push_back(j);
      sw.insert(sw.end(), w.begin(), w.end());
      out.add_term(sw, c);
    }
    return out;
  }

  // p(X) = sum P_w (x) X^w, X^{empty} = I.  All X_j must be square of equal size.
  CMat evaluate(const std::vector<CMat>& X) const {
    if (static_cast<int>(X.size()) != g_) throw std::invalid_argument("evaluate: tuple length != g");
    Eigen::Index l = X.empty() ? 1 : X[0].rows();
    for (const auto& Xj : X)
      if (Xj.rows() != l || Xj.cols() != l) throw std::invalid_argument("evaluate: tuple size mismatch");
    CMat out = CMat::Zero(rows_ * l, cols_ * l);
    std::map<Word, CMat, GradedLexLess> powers;
    powers[Word{}] = CMat::Identity(l, l);
    for (const auto& [w, c] : terms_) out += kron(c, word_power(w, X, powers));
    return out;
  }

  // Affine substitution x_j -> sum_k Tinv[j][k] (x_k - b_k) given as the
  // degree-1 image of each letter; used by pencil monicization round trips.
  NCPoly substitute_letters(const std::vector<NCPoly>& images) const {
    if (static_cast<int>(images.size()) != g_) throw std::invalid_argument("substitute: need one image per letter");
    int gq = images.empty() ? g_ : images[0].g();
    NCPoly out(gq, rows_, cols_);
    for (const auto& [w, c] : terms_) {
      NCPoly term = NCPoly::identity(gq, 1);
      for (int letter : w) term = term * images[letter - 1];
      for (const auto& [u, s] : term.terms_) out.add_term(u, c * s(0, 0));
    }
    return out;
  }

 private:
  void check_word(const Word& w) const {
    for (int a : w)
      if (a < 1 || a > g_) throw std::invalid_argument("word letter out of range 1..g");
  }
  void check_compatible(const NCPoly& q) const {
    if (g_ != q.g_ || rows_ != q.rows_ || cols_ != q.cols_)
      throw std::invalid_argument("NCPoly: shape mismatch");
  }

  static const CMat& word_power(const Word& w, const std::vector<CMat>& X,
                                std::map<Word, CMat, GradedLexLess>& cache) {
    auto it = cache.find(w);
    if (it != cache.end()) return it->second;
    Word head(w.begin(), w.end() - 1);
    CMat val = word_power(head, X, cache) * X[w.back() - 1];
    return cache.emplace(w, std::move(val)).first->second;
  }

  int g_ = 1;
  int rows_ = 1;
  int cols_ = 1;
  std::map<Word, CMat, GradedLexLess> terms_;
};

inline NCPoly operator*(Complex s, const NCPoly& p) { return p * s; }

// V_d^* G V_d for a Gram block matrix over WordBasis(d): the coefficient of w
// collects sum_{u* v = w} G[u, v].  G is (nu N(d)) x (nu N(d)) with nu x nu
// blocks in basis order.
inline NCPoly gram_to_poly(const CMat& G, const WordBasis& basis, int nu) {
  const auto N = static_cast<Eigen::Index>(basis.size());
  if (G.rows() != nu * N || G.cols() != nu * N)
    throw std::invalid_argument("gram_to_poly: Gram size is not nu*N(d)");
  NCPoly p(basis.g(), nu, nu);
  for (Eigen::Index ui = 0; ui < N; ++ui)
    for (Eigen::Index vi = 0; vi < N; ++vi) {
      CMat block = G.block(ui * nu, vi * nu, nu, nu);
      if (block.isZero(0.0)) continue;
      p.add_term(word_star_concat(basis[ui], basis[vi]), block);
    }
  return p;
}

}  // namespace ncsos
