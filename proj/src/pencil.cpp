#include "ncsos/pencil.hpp"

#include <Eigen/Eigenvalues>
#include <iostream>
#include <stdexcept>

namespace ncsos {

namespace {

void validate_blocks(const std::vector<CMat>& coeffs, const std::vector<PencilBlock>& blocks, int mu) {
  int covered = 0;
  for (const auto& b : blocks) {
    if (b.offset != covered || b.size < 1) throw std::invalid_argument("pencil blocks must tile 0..mu contiguously");
    covered += b.size;
  }
  if (covered != mu) throw std::invalid_argument("pencil blocks do not cover the coefficient size");
  // Declared blocks must be invariant for every coefficient: off-block entries exactly zero.
  for (const auto& A : coeffs) {
    for (const auto& b : blocks) {
      for (int r = b.offset; r < b.offset + b.size; ++r)
        for (int c = 0; c < mu; ++c) {
          bool inside = c >= b.offset && c < b.offset + b.size;
          if (!inside && A(r, c) != Complex(0, 0))
            throw std::invalid_argument("pencil coefficient has support outside the declared blocks");
        }
    }
  }
}

}  // namespace

LinearPencil::LinearPencil(int g_, std::vector<CMat> coeffs_, std::vector<PencilBlock> blocks_) {
  if (g_ < 0) throw std::invalid_argument("pencil: g must be >= 0");
  if (coeffs_.size() != static_cast<std::size_t>(g_) + 1) throw std::invalid_argument("pencil: need A0..Ag");
  g = g_;
  mu = static_cast<int>(coeffs_[0].rows());
  for (auto& A : coeffs_) {
    if (A.rows() != mu || A.cols() != mu) throw std::invalid_argument("pencil: coefficient sizes differ");
    double herm_err = (A - A.adjoint()).cwiseAbs().maxCoeff();
    if (herm_err > 1e-12)
      throw std::invalid_argument("pencil: coefficient is not hermitian (error " + std::to_string(herm_err) + ")");
    if (herm_err > 0) {
      std::cerr << "warning: symmetrizing pencil coefficient with hermiticity error " << herm_err << "\n";
      A = 0.5 * (A + A.adjoint().eval());
    }
  }
  coeffs = std::move(coeffs_);
  if (blocks_.empty()) blocks_.push_back(PencilBlock{0, mu});
  validate_blocks(coeffs, blocks_, mu);
  blocks = std::move(blocks_);
}

LinearPencil LinearPencil::monic(int g_, int mu_, std::vector<CMat> linear_coeffs,
                                 std::vector<PencilBlock> blocks_) {
  std::vector<CMat> all;
  all.push_back(CMat::Identity(mu_, mu_));
  for (auto& A : linear_coeffs) all.push_back(std::move(A));
  return LinearPencil(g_, std::move(all), std::move(blocks_));
}

CMat LinearPencil::evaluate(const std::vector<CMat>& X) const {
  if (static_cast<int>(X.size()) != g) throw std::invalid_argument("pencil evaluate: tuple length != g");
  Eigen::Index l = X.empty() ? 1 : X[0].rows();
  for (const auto& Xj : X)
    if (Xj.rows() != l || Xj.cols() != l) throw std::invalid_argument("pencil evaluate: tuple size mismatch");
  CMat out = kron(coeffs[0], CMat::Identity(l, l));
  for (int j = 1; j <= g; ++j) out += kron(coeffs[static_cast<std::size_t>(j)], X[static_cast<std::size_t>(j - 1)]);
  return out;
}

double min_eigenvalue(const CMat& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMat> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool membership(const LinearPencil& L, const std::vector<CMat>& X, double tol) {
  for (const auto& Xj : X)
    if ((Xj - Xj.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("membership: tuple entry is not hermitian");
  return min_eigenvalue(L.evaluate(X)) >= -tol;
}

AffineChange AffineChange::inverse() const {
  AffineChange inv;
  inv.T = T.inverse();
  inv.b = -inv.T * b;
  return inv;
}

double AffineChange::condition() const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
  return svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
}

LinearPencil apply_change(const LinearPencil& pencil, const AffineChange& change) {
  if (change.T.rows() != pencil.g || change.T.cols() != pencil.g || change.b.size() != pencil.g)
    throw std::invalid_argument("apply_change: change of variables has wrong dimensions");
  if (std::abs(change.T.determinant()) < 1e-14) throw std::invalid_argument("apply_change: T is singular");

  std::vector<CMat> coeffs;
  CMat constant = pencil.coeffs[0];
  for (int i = 1; i <= pencil.g; ++i)
    constant += change.b(i - 1) * pencil.coeffs[static_cast<std::size_t>(i)];
  coeffs.push_back(std::move(constant));
  for (int j = 1; j <= pencil.g; ++j) {
    CMat Aj = CMat::Zero(pencil.mu, pencil.mu);
    for (int i = 1; i <= pencil.g; ++i) Aj += change.T(i - 1, j - 1) * pencil.coeffs[static_cast<std::size_t>(i)];
    coeffs.push_back(std::move(Aj));
  }
  return LinearPencil(pencil.g, std::move(coeffs), pencil.blocks);
}

LinearPencil monicize(const LinearPencil& pencil, const AffineChange& change) {
  LinearPencil out = apply_change(pencil, change);
  if ((out.coeffs[0] - CMat::Identity(pencil.mu, pencil.mu)).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("not monicizable at (T, b): constant term is not the identity");
  out.coeffs[0] = CMat::Identity(pencil.mu, pencil.mu);
  return out;
}

LinearPencil build_povm_pencil(const std::vector<int>& factors) {
  if (factors.empty()) throw std::invalid_argument("build_povm_pencil: empty signature");
  int g = 0, mu = 0;
  for (int n : factors) {
    if (n < 2) throw std::invalid_argument("build_povm_pencil: every factor must be >= 2");
    g += n - 1;
    mu += n;
  }
  std::vector<CMat> coeffs(static_cast<std::size_t>(g) + 1, CMat::Zero(mu, mu));
  std::vector<PencilBlock> blocks;
  int offset = 0, var = 1;
  for (int n : factors) {
    for (int j = 0; j < n; ++j) blocks.push_back(PencilBlock{offset + j, 1});
    // block i contributes n * diag(y_{i,1}, ..., y_{i,n-1}, 1 - sum_j y_{i,j})
    coeffs[0](offset + n - 1, offset + n - 1) = static_cast<double>(n);
    for (int j = 0; j < n - 1; ++j) {
      coeffs[static_cast<std::size_t>(var)](offset + j, offset + j) = static_cast<double>(n);
      coeffs[static_cast<std::size_t>(var)](offset + n - 1, offset + n - 1) = -static_cast<double>(n);
      ++var;
    }
    offset += n;
  }
  return LinearPencil(g, std::move(coeffs), std::move(blocks));
}

AffineChange povm_monic_change(const std::vector<int>& factors) {
  int g = 0;
  for (int n : factors) g += n - 1;
  AffineChange ch;
  ch.T = Eigen::MatrixXd::Identity(g, g);
  ch.b = Eigen::VectorXd::Zero(g);
  int var = 0;
  for (int n : factors)
    for (int j = 0; j < n - 1; ++j) ch.b(var++) = 1.0 / static_cast<double>(n);
  return ch;
}

LinearPencil augment_bounded(const LinearPencil& pencil, int n) {
  if (!pencil.is_monic(0.0)) throw std::invalid_argument("augment_bounded: pencil must be monic");
  if (n < 1) throw std::invalid_argument("augment_bounded: n must be >= 1");
  const int g = pencil.g;
  const int mu = pencil.mu + 2 * g;
  std::vector<CMat> coeffs;
  coeffs.push_back(CMat::Identity(mu, mu));
  for (int j = 1; j <= g; ++j) {
    CMat Aj = CMat::Zero(mu, mu);
    Aj.topLeftCorner(pencil.mu, pencil.mu) = pencil.coeffs[static_cast<std::size_t>(j)];
    int r = pencil.mu + 2 * (j - 1);
    Aj(r, r + 1) = 1.0 / static_cast<double>(n);
    Aj(r + 1, r) = 1.0 / static_cast<double>(n);
    coeffs.push_back(std::move(Aj));
  }
  std::vector<PencilBlock> blocks = pencil.blocks;
  for (int j = 0; j < g; ++j) blocks.push_back(PencilBlock{pencil.mu + 2 * j, 2});
  return LinearPencil(g, std::move(coeffs), std::move(blocks));
}

std::optional<std::vector<CMat>> sample_point(const LinearPencil& pencil, int l, std::uint64_t seed,
                                              int max_tries) {
  if (!pencil.is_monic(1e-12)) throw std::invalid_argument("sample_point: pencil must be monic");
  Rng rng(seed);
  const double margin = 1e-6;
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    std::vector<CMat> X = rng.hermitian_tuple(pencil.g, l);
    // Shrink along the ray t X until the pencil has the required interior margin;
    // always terminates since L(0) = I.
    double t = 1.0;
    for (int halvings = 0; halvings < 80; ++halvings) {
      std::vector<CMat> tX;
      tX.reserve(X.size());
      for (const auto& Xj : X) tX.push_back(t * Xj);
      if (min_eigenvalue(pencil.evaluate(tX)) >= margin) return tX;
      t *= 0.5;
    }
  }
  return std::nullopt;
}

}  // namespace ncsos
