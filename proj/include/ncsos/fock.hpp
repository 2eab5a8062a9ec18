// Truncated Fock space machinery: symmetrized creation operators, the
// coefficient extraction matrix and its inverse, and pencil scaling.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ncsos/ncpoly.hpp"
#include "ncsos/word.hpp"

namespace ncsos {

struct LinearPencil;  // pencil.hpp

// The tuple A = (A_1..A_g) of symmetrized creation operators compressed to
// span{e_w : |w| <= trunc_degree}, in the graded-lex word basis.
struct FockTuple {
  int g = 0;
  int trunc_degree = 0;  // words beyond this length are compressed away
  WordBasis basis;
  std::vector<Eigen::MatrixXd> A;

  // Evaluates a polynomial at the tuple (A_j promoted to complex).
  CMat evaluate(const NCPoly& p) const;
};

// M with M[w, v] = <A^w Omega, e_v>; invertible, with M_inv cached.
// lambda_bound = ||M^{-1}|| * N(trunc_degree) is the coefficient bound constant.
struct ExtractionMatrix {
  int g = 0;
  int trunc_degree = 0;
  Eigen::MatrixXd M;
  Eigen::MatrixXd M_inv;
  double condition = 0;
  double lambda_bound = 0;
};

FockTuple build_fock_tuple(int g, int trunc_degree, std::size_t size_cap = 20000);

ExtractionMatrix extraction_matrix(const FockTuple& fock);

// Recovers q of degree <= trunc_degree from T = q(A).  Throws if re-evaluating
// the result at A misses T by more than reeval_tol.
NCPoly extract_coefficients(const CMat& T, const FockTuple& fock, int nu,
                            const ExtractionMatrix& extraction, double reeval_tol = 1e-6);
NCPoly extract_coefficients(const CMat& T, const FockTuple& fock, int nu, double reeval_tol = 1e-6);

// Largest t in {1, 1/2, 1/4, ...} with lambda_min(L(tA)) >= 1/2.  Throws below
// the 2^-40 floor (pathological pencil).
double scale_for_pencil(const LinearPencil& pencil, const FockTuple& fock);

}  // namespace ncsos
