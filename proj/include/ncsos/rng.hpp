// Seeded, implementation-independent random sampling helpers.
//
// std::normal_distribution is implementation-defined, so all randomness here
// is built from splitmix64 + Box-Muller to keep outputs identical for a given
// seed regardless of the standard library.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ncsos/ncpoly.hpp"

namespace ncsos {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  std::uint64_t uniform_below(std::uint64_t n) { return next_u64() % n; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = 0;
    while (u <= 1e-300) u = uniform();
    double v = uniform();
    double r = std::sqrt(-2.0 * std::log(u));
    spare_ = r * std::sin(2.0 * M_PI * v);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * v);
  }

  Complex cnormal() {
    double re = normal();
    double im = normal();
    return Complex(re, im) / std::sqrt(2.0);
  }

  // Independent child stream; used to parallelize sampling deterministically.
  Rng split(std::uint64_t k) const {
    Rng child(state_ ^ (0x9e3779b97f4a7c15ULL * (k + 1)));
    child.next_u64();
    return child;
  }

  CMat complex_gaussian(int rows, int cols) {
    CMat m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = cnormal();
    return m;
  }

  Eigen::MatrixXd real_gaussian(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  CMat hermitian(int n, double scale = 1.0) {
    CMat a = complex_gaussian(n, n);
    return scale * 0.5 * (a + a.adjoint());
  }

  std::vector<CMat> hermitian_tuple(int g, int n, double scale = 1.0) {
    std::vector<CMat> X;
    X.reserve(g);
    for (int j = 0; j < g; ++j) X.push_back(hermitian(n, scale));
    return X;
  }

  CMat unitary(int n) {
    CMat a = complex_gaussian(n, n);
    Eigen::HouseholderQR<CMat> qr(a);
    CMat q = qr.householderQ();
    CMat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
      Complex d = r(j, j);
      double ad = std::abs(d);
      q.col(j) *= (ad > 1e-300) ? d / ad : Complex(1, 0);
    }
    return q;
  }

  // Random polynomial with coefficients of the given shape and degree <= d.
  NCPoly nc_poly(int g, int d, int rows, int cols, double scale = 1.0) {
    WordBasis basis(g, d);
    NCPoly p(g, rows, cols);
    for (const auto& w : basis.words()) p.add_term(w, scale * complex_gaussian(rows, cols));
    return p;
  }

  // Random hermitian polynomial of degree <= d, built as q + q*.
  NCPoly nc_poly_hermitian(int g, int d, int dim, double scale = 1.0) {
    NCPoly q = nc_poly(g, d, dim, dim, scale * 0.5);
    return q + q.adjoint();
  }

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0;
};

}  // namespace ncsos
