#include "ncsos/fock.hpp"

#include <Eigen/SVD>
#include <stdexcept>

#include "ncsos/pencil.hpp"

namespace ncsos {

FockTuple build_fock_tuple(int g, int trunc_degree, std::size_t size_cap) {
  if (g < 1) throw std::invalid_argument("build_fock_tuple: g must be >= 1");
  if (trunc_degree < 1) throw std::invalid_argument("build_fock_tuple: truncation degree must be >= 1");
  words_up_to(g, trunc_degree, size_cap);  // overflow guard

  FockTuple f;
  f.g = g;
  f.trunc_degree = trunc_degree;
  f.basis = WordBasis(g, trunc_degree);
  const auto N = static_cast<Eigen::Index>(f.basis.size());

  // A_j = iota* (C_j + C_j*) iota: A_j[v, w] = 1 iff v = x_j w or w = x_j v.
  for (int j = 1; j <= g; ++j) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    for (Eigen::Index wi = 0; wi < N; ++wi) {
      const Word& w = f.basis[wi];
      if (static_cast<int>(w.size()) < trunc_degree) {
        Word v;
        v.reserve(w.size() + 1);
        v.push_back(j);
        v.insert(v.end(), w.begin(), w.end());
        Eigen::Index vi = static_cast<Eigen::Index>(f.basis.index(v));
        A(vi, wi) = 1.0;
        A(wi, vi) = 1.0;
      }
    }
    f.A.push_back(std::move(A));
  }
  return f;
}

CMat FockTuple::evaluate(const NCPoly& p) const {
  std::vector<CMat> X;
  X.reserve(A.size());
  for (const auto& Aj : A) X.push_back(Aj.cast<Complex>());
  return p.evaluate(X);
}

ExtractionMatrix extraction_matrix(const FockTuple& fock) {
  const auto& basis = fock.basis;
  const auto N = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd M(N, N);

  // f_w = A^w Omega, computed along suffixes (every suffix of a basis word is
  // itself a basis word, and precedes it in graded-lex order).
  std::vector<Eigen::VectorXd> f(static_cast<std::size_t>(N));
  for (Eigen::Index wi = 0; wi < N; ++wi) {
    const Word& w = basis[wi];
    if (w.empty()) {
      f[wi] = Eigen::VectorXd::Zero(N);
      f[wi](0) = 1.0;
    } else {
      Word suffix(w.begin() + 1, w.end());
      f[wi] = fock.A[static_cast<std::size_t>(w.front() - 1)] * f[basis.index(suffix)];
    }
    M.row(wi) = f[wi].transpose();
  }

  ExtractionMatrix ext;
  ext.g = fock.g;
  ext.trunc_degree = fock.trunc_degree;
  ext.M = M;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible())
    throw std::runtime_error("extraction matrix is singular; construction bug");
  ext.M_inv = lu.inverse();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
  ext.condition = svd.singularValues()(0) / svd.singularValues()(N - 1);
  ext.lambda_bound = ext.M_inv.operatorNorm() * static_cast<double>(N);
  return ext;
}

NCPoly extract_coefficients(const CMat& T, const FockTuple& fock, int nu,
                            const ExtractionMatrix& extraction, double reeval_tol) {
  const auto N = static_cast<Eigen::Index>(fock.basis.size());
  if (T.rows() != nu * N || T.cols() != nu * N)
    throw std::invalid_argument("extract_coefficients: T is not (nu N) x (nu N)");

  // Z_v = (id (x) Omega_v)(T): the coefficient-indexed matrix picking the
  // (row e_v, column e_empty) slot of the Fock factor.  evaluate() lays out
  // kron(P, A^w) coefficient-major, so entry (a, b) of Z_v sits at
  // (a N + v, b N).
  std::vector<CMat> Z(static_cast<std::size_t>(N), CMat(nu, nu));
  for (Eigen::Index vi = 0; vi < N; ++vi)
    for (int a = 0; a < nu; ++a)
      for (int b = 0; b < nu; ++b) Z[static_cast<std::size_t>(vi)](a, b) = T(a * N + vi, b * N);

  NCPoly q(fock.g, nu, nu);
  for (Eigen::Index wi = 0; wi < N; ++wi) {
    CMat Qw = CMat::Zero(nu, nu);
    for (Eigen::Index vi = 0; vi < N; ++vi) Qw += Z[vi] * extraction.M_inv(vi, wi);
    q.add_term(fock.basis[wi], Qw);
  }
  q = q.pruned();

  double err = (fock.evaluate(q) - T).cwiseAbs().maxCoeff();
  if (err > reeval_tol)
    throw std::runtime_error("extract_coefficients: input is not a degree-d polynomial image (residual " +
                             std::to_string(err) + ")");
  return q;
}

NCPoly extract_coefficients(const CMat& T, const FockTuple& fock, int nu, double reeval_tol) {
  return extract_coefficients(T, fock, nu, extraction_matrix(fock), reeval_tol);
}

double scale_for_pencil(const LinearPencil& pencil, const FockTuple& fock) {
  if (!pencil.is_monic(1e-12)) throw std::invalid_argument("scale_for_pencil: pencil must be monic");
  std::vector<CMat> X;
  X.reserve(fock.A.size());
  for (const auto& Aj : fock.A) X.push_back(Aj.cast<Complex>());

  double t = 1.0;
  const double floor = std::pow(2.0, -40);
  while (true) {
    std::vector<CMat> tX;
    tX.reserve(X.size());
    for (const auto& Xj : X) tX.push_back(t * Xj);
    if (min_eigenvalue(pencil.evaluate(tX)) >= 0.5) return t;
    t *= 0.5;
    if (t < floor) throw std::runtime_error("scale_for_pencil: scaling underflow; pathological pencil");
  }
}

}  // namespace ncsos
