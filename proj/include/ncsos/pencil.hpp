// Linear pencils, free spectrahedra, affine monicization, the povm pencil and
// the bounding augmentation.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "ncsos/ncpoly.hpp"
#include "ncsos/rng.hpp"

namespace ncsos {

struct PencilBlock {
  int offset = 0;
  int size = 0;
};

// L(x) = A0 + sum_j A_j x_j with hermitian mu x mu coefficients and a declared
// block-diagonal decomposition (default: one block).  Coefficients are
// symmetrized on construction; inputs further than 1e-12 from hermitian are
// rejected.
struct LinearPencil {
  int g = 0;
  int mu = 0;
  std::vector<CMat> coeffs;  // A0..Ag
  std::vector<PencilBlock> blocks;

  LinearPencil() = default;
  LinearPencil(int g_, std::vector<CMat> coeffs_, std::vector<PencilBlock> blocks_ = {});

  static LinearPencil monic(int g_, int mu_, std::vector<CMat> linear_coeffs,
                            std::vector<PencilBlock> blocks_ = {});

  const CMat& A(int j) const { return coeffs[static_cast<std::size_t>(j)]; }
  CMat block_coeff(int k, int j) const {
    const auto& b = blocks[static_cast<std::size_t>(k)];
    return coeffs[static_cast<std::size_t>(j)].block(b.offset, b.offset, b.size, b.size);
  }

  bool is_monic(double tol = 0.0) const {
    return (coeffs[0] - CMat::Identity(mu, mu)).cwiseAbs().maxCoeff() <= tol;
  }

  // L(X) = A0 (x) I + sum A_j (x) X_j.
  CMat evaluate(const std::vector<CMat>& X) const;
};

double min_eigenvalue(const CMat& hermitian);

bool membership(const LinearPencil& L, const std::vector<CMat>& X, double tol = 1e-8);

// Affine change of variables x -> Tx + b (T invertible, real).
struct AffineChange {
  Eigen::MatrixXd T;
  Eigen::VectorXd b;
  AffineChange inverse() const;
  double condition() const;
};

// L(Tx + b) with no condition on the resulting constant term.
LinearPencil apply_change(const LinearPencil& pencil, const AffineChange& change);

// L_hat(x) = L(Tx + b); requires the resulting constant term to be the
// identity within 1e-10.
LinearPencil monicize(const LinearPencil& pencil, const AffineChange& change);

// The direct sum over i of n_i * L[n_i] in variables y_{i,j}, declared as
// scalar blocks; membership at E is exactly E_{i,j} >= 0 and sum_j E_{i,j} <= I
// per factor.
LinearPencil build_povm_pencil(const std::vector<int>& factors);

// The affine change (T = I, b_{i,j} = 1/n_i) that monicizes build_povm_pencil.
AffineChange povm_monic_change(const std::vector<int>& factors);

// Lambda_n = I + sum_j (A_j (+) S_j / n) x_j with S_j the 2g x 2g matrix with
// ones at (2j-1, 2j) and (2j, 2j-1); D_{Lambda_n} is D_L cut to ||X_j|| <= n.
LinearPencil augment_bounded(const LinearPencil& pencil, int n);

// Draws a random hermitian tuple and shrinks it along its ray into D_L with a
// small interior margin.  Deterministic per seed.
std::optional<std::vector<CMat>> sample_point(const LinearPencil& pencil, int l, std::uint64_t seed,
                                              int max_tries = 1000);

}  // namespace ncsos
