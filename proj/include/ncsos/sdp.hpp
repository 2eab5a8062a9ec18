// Dense semidefinite programming over hermitian PSD blocks with linear
// equality constraints: a homogeneous self-dual interior-point kernel,
// PSD factorization, and helpers shared by the certificate machinery.
//
// Conventions: the primal is  min <C, X>  s.t.  <A_i, X> = b_i,  X >= 0
// (blockwise hermitian), the dual  max b'y  s.t.  C - sum y_i A_i >= 0.
// Complex data is realified internally via [[Re, -Im], [Im, Re]].
#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ncsos/ncpoly.hpp"

namespace ncsos::sdp {

// One stored entry of a hermitian matrix: value at (row, col) plus the
// implied conjugate at (col, row); diagonal entries must be real.
struct Entry {
  int row = 0;
  int col = 0;
  Complex value;
};

struct ConstraintMat {
  int block = 0;
  std::vector<Entry> entries;
};

struct Constraint {
  std::vector<ConstraintMat> mats;
  double rhs = 0;
};

struct SdpProblem {
  std::vector<int> block_sizes;
  std::vector<Constraint> constraints;
  std::vector<ConstraintMat> objective;  // empty = pure feasibility

  std::size_t num_constraints() const { return constraints.size(); }
  void validate() const;
  bool is_real() const;
  CMat dense_constraint(std::size_t i, int block) const;
  CMat dense_objective(int block) const;
};

enum class SdpStatus { Optimal, Infeasible, Inaccurate, IterationLimit };

std::string to_string(SdpStatus s);

struct SdpSolution {
  SdpStatus status = SdpStatus::Inaccurate;
  std::vector<CMat> primal;      // X blocks; for Infeasible, an improving ray when dual-infeasible
  std::vector<CMat> dual_slack;  // Z blocks
  Eigen::VectorXd dual;          // y; for Infeasible, the improving dual ray
  double primal_obj = 0;
  double dual_obj = 0;
  double gap = 0;
  double primal_residual = 0;
  double dual_residual = 0;
  int iterations = 0;
  std::string detail;
};

struct SdpOptions {
  double tol_feas = 1e-8;
  double tol_gap = 1e-8;
  double tol_psd = 1e-8;
  int max_iterations = 200;
  std::size_t max_constraints = 100000;
  bool verbose = false;
};

SdpSolution solve(const SdpProblem& problem, const SdpOptions& opts = {});

// Realifies every block via the standard embedding; right-hand sides and the
// objective pick up the factor 2 from tr(realify(A) realify(X)) = 2 tr(AX).
SdpProblem realify(const SdpProblem& problem);

CMat realify_matrix(const CMat& hermitian);

// G ~ F* F with rows(F) = numerical rank; eigenvalues below
// rank_tol * lambda_max are clamped to zero.  Throws on significantly
// indefinite input (lambda_min < -10 * rank_tol * lambda_max).
CMat psd_factor(const CMat& gram, double rank_tol = 1e-8);

}  // namespace ncsos::sdp
