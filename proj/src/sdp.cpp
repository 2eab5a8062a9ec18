#include "ncsos/sdp.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace ncsos::sdp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Real symmetric-block problem extracted from an SdpProblem.

struct RealEntry {
  int row, col;
  double value;  // stored at (row, col) and mirrored at (col, row)
};

struct RealMat {
  int block;
  std::vector<RealEntry> entries;
};

struct RealProblem {
  std::vector<int> block_sizes;
  std::vector<std::vector<RealMat>> constraints;  // per constraint
  VectorXd b;
  std::vector<RealMat> objective;
};

void add_dense(std::vector<MatrixXd>& acc, const std::vector<RealMat>& mats, double scale) {
  for (const auto& m : mats)
    for (const auto& e : m.entries) {
      acc[static_cast<std::size_t>(m.block)](e.row, e.col) += scale * e.value;
      if (e.row != e.col) acc[static_cast<std::size_t>(m.block)](e.col, e.row) += scale * e.value;
    }
}

double dot_sparse(const std::vector<RealMat>& mats, const std::vector<MatrixXd>& X) {
  double s = 0;
  for (const auto& m : mats)
    for (const auto& e : m.entries) {
      double x = X[static_cast<std::size_t>(m.block)](e.row, e.col);
      s += (e.row == e.col) ? e.value * x : 2.0 * e.value * x;
    }
  return s;
}

double frob_norm(const std::vector<MatrixXd>& X) {
  double s = 0;
  for (const auto& x : X) s += x.squaredNorm();
  return std::sqrt(s);
}

std::vector<MatrixXd> zeros_like(const std::vector<int>& sizes) {
  std::vector<MatrixXd> out;
  out.reserve(sizes.size());
  for (int n : sizes) out.push_back(MatrixXd::Zero(n, n));
  return out;
}

bool robust_cholesky(const MatrixXd& M, MatrixXd& L);

// Largest step alpha with M + alpha D >= 0, via the generalized eigenvalue
// bound lambda_min(L^-1 D L^-T) for M = L L^T.
double max_step(const MatrixXd& M, const MatrixXd& D) {
  MatrixXd L;
  if (!robust_cholesky(M, L)) return 0.0;
  MatrixXd S = L.triangularView<Eigen::Lower>().solve(D);
  S = L.triangularView<Eigen::Lower>().solve(S.transpose().eval());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct Scaling {
  std::vector<MatrixXd> G, Ginv, W;
  std::vector<VectorXd> lambda;  // scaled-point spectrum per block
};

// Cholesky factor with an eigenvalue floor as fallback; near degenerate
// optimal faces the iterates can brush singularity before the convergence
// test fires.
bool robust_cholesky(const MatrixXd& M, MatrixXd& L) {
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() == Eigen::Success) {
    L = llt.matrixL();
    return true;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
  double floor = std::max(1e-14, 1e-14 * es.eigenvalues().maxCoeff());
  VectorXd clamped = es.eigenvalues().cwiseMax(floor);
  MatrixXd fixed = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
  Eigen::LLT<MatrixXd> retry(fixed);
  if (retry.info() != Eigen::Success) return false;
  L = retry.matrixL();
  return true;
}

// Nesterov-Todd scaling point: X = L L^T, Z = R R^T, R^T L = U S V^T,
// G = L V S^{-1/2}; then G^{-1} X G^{-T} = G^T Z G = S.
bool nt_scaling(const std::vector<MatrixXd>& X, const std::vector<MatrixXd>& Z, Scaling& sc) {
  const auto nb = X.size();
  sc.G.assign(nb, MatrixXd());
  sc.Ginv.assign(nb, MatrixXd());
  sc.W.assign(nb, MatrixXd());
  sc.lambda.assign(nb, VectorXd());
  for (std::size_t b = 0; b < nb; ++b) {
    MatrixXd L, R;
    if (!robust_cholesky(X[b], L) || !robust_cholesky(Z[b], R)) return false;
    Eigen::JacobiSVD<MatrixXd> svd(R.transpose() * L, Eigen::ComputeFullU | Eigen::ComputeFullV);
    VectorXd s = svd.singularValues();
    if (s.minCoeff() <= 0) return false;
    VectorXd si = s.cwiseSqrt().cwiseInverse();
    sc.G[b] = L * svd.matrixV() * si.asDiagonal();
    sc.Ginv[b] = si.cwiseInverse().asDiagonal() * svd.matrixV().transpose() *
                 L.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(L.rows(), L.cols()));
    sc.W[b] = sc.G[b] * sc.G[b].transpose();
    sc.lambda[b] = s;
  }
  return true;
}

struct Residuals {
  VectorXd rp;                 // b tau - A(X)
  std::vector<MatrixXd> Rd;    // C tau - A*(y) - Z
  double rg = 0;               // kappa + <C,X> - b'y
};

}  // namespace

void SdpProblem::validate() const {
  if (constraints.size() > static_cast<std::size_t>(100000))
    throw std::invalid_argument("sdp: constraint count exceeds cap");
  auto check_mat = [&](const ConstraintMat& m, const char* what) {
    if (m.block < 0 || m.block >= static_cast<int>(block_sizes.size()))
      throw std::invalid_argument(std::string("sdp: ") + what + " references a missing block");
    int n = block_sizes[static_cast<std::size_t>(m.block)];
    for (const auto& e : m.entries) {
      if (e.row < 0 || e.col < 0 || e.row >= n || e.col >= n)
        throw std::invalid_argument(std::string("sdp: ") + what + " entry out of block range");
      if (e.row == e.col && std::abs(e.value.imag()) > 0)
        throw std::invalid_argument(std::string("sdp: ") + what + " has a non-real diagonal entry");
    }
  };
  for (int n : block_sizes)
    if (n < 1) throw std::invalid_argument("sdp: block sizes must be positive");
  for (const auto& c : constraints)
    for (const auto& m : c.mats) check_mat(m, "constraint");
  for (const auto& m : objective) check_mat(m, "objective");
}

bool SdpProblem::is_real() const {
  auto real_mats = [](const std::vector<ConstraintMat>& mats) {
    for (const auto& m : mats)
      for (const auto& e : m.entries)
        if (e.value.imag() != 0.0) return false;
    return true;
  };
  for (const auto& c : constraints)
    if (!real_mats(c.mats)) return false;
  return real_mats(objective);
}

CMat SdpProblem::dense_constraint(std::size_t i, int block) const {
  int n = block_sizes[static_cast<std::size_t>(block)];
  CMat A = CMat::Zero(n, n);
  for (const auto& m : constraints[i].mats) {
    if (m.block != block) continue;
    for (const auto& e : m.entries) {
      A(e.row, e.col) += e.value;
      if (e.row != e.col) A(e.col, e.row) += std::conj(e.value);
    }
  }
  return A;
}

CMat SdpProblem::dense_objective(int block) const {
  int n = block_sizes[static_cast<std::size_t>(block)];
  CMat C = CMat::Zero(n, n);
  for (const auto& m : objective) {
    if (m.block != block) continue;
    for (const auto& e : m.entries) {
      C(e.row, e.col) += e.value;
      if (e.row != e.col) C(e.col, e.row) += std::conj(e.value);
    }
  }
  return C;
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::Inaccurate: return "Inaccurate";
    case SdpStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

CMat realify_matrix(const CMat& h) {
  const auto n = h.rows();
  CMat out = CMat::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real().cast<Complex>();
  out.bottomRightCorner(n, n) = h.real().cast<Complex>();
  out.topRightCorner(n, n) = (-h.imag()).cast<Complex>();
  out.bottomLeftCorner(n, n) = h.imag().cast<Complex>();
  return out;
}

namespace {

std::vector<RealMat> realify_mats(const std::vector<ConstraintMat>& mats, const std::vector<int>& sizes) {
  std::vector<RealMat> out;
  for (const auto& m : mats) {
    RealMat rm;
    rm.block = m.block;
    int n = sizes[static_cast<std::size_t>(m.block)];
    for (const auto& e : m.entries) {
      double re = e.value.real(), im = e.value.imag();
      if (re != 0.0) {
        rm.entries.push_back({e.row, e.col, re});
        rm.entries.push_back({e.row + n, e.col + n, re});
      }
      if (im != 0.0) {
        rm.entries.push_back({e.row, e.col + n, -im});
        rm.entries.push_back({e.col, e.row + n, im});
      }
    }
    if (!rm.entries.empty()) out.push_back(std::move(rm));
  }
  return out;
}

std::vector<RealMat> as_real_mats(const std::vector<ConstraintMat>& mats) {
  std::vector<RealMat> out;
  for (const auto& m : mats) {
    RealMat rm;
    rm.block = m.block;
    for (const auto& e : m.entries) rm.entries.push_back({e.row, e.col, e.value.real()});
    if (!rm.entries.empty()) out.push_back(std::move(rm));
  }
  return out;
}

RealProblem build_real_problem(const SdpProblem& p, bool& was_realified) {
  RealProblem rp;
  was_realified = !p.is_real();
  const auto m = p.constraints.size();
  rp.b.resize(static_cast<Eigen::Index>(m));
  if (was_realified) {
    for (int n : p.block_sizes) rp.block_sizes.push_back(2 * n);
    for (std::size_t i = 0; i < m; ++i) {
      rp.constraints.push_back(realify_mats(p.constraints[i].mats, p.block_sizes));
      rp.b(static_cast<Eigen::Index>(i)) = 2.0 * p.constraints[i].rhs;
    }
    rp.objective = realify_mats(p.objective, p.block_sizes);
  } else {
    rp.block_sizes = p.block_sizes;
    for (std::size_t i = 0; i < m; ++i) {
      rp.constraints.push_back(as_real_mats(p.constraints[i].mats));
      rp.b(static_cast<Eigen::Index>(i)) = p.constraints[i].rhs;
    }
    rp.objective = as_real_mats(p.objective);
  }
  return rp;
}

// ---------------------------------------------------------------------------
// Homogeneous self-dual interior-point method with NT scaling and Mehrotra
// predictor-corrector.

struct IpmState {
  std::vector<MatrixXd> X, Z;
  VectorXd y;
  double tau = 1, kappa = 1;
};

class HsdSolver {
 public:
  HsdSolver(const RealProblem& p, const SdpOptions& opts) : p_(p), opts_(opts) {
    m_ = p.constraints.size();
    total_dim_ = 0;
    for (int n : p.block_sizes) total_dim_ += n;
    Cd_ = zeros_like(p.block_sizes);
    add_dense(Cd_, p.objective, 1.0);
    normC_ = std::max(1.0, frob_norm(Cd_));
    normb_ = std::max(1.0, p.b.norm());
  }

  SdpSolution run() {
    IpmState s;
    s.X = zeros_like(p_.block_sizes);
    s.Z = zeros_like(p_.block_sizes);
    for (std::size_t b = 0; b < p_.block_sizes.size(); ++b) {
      s.X[b].setIdentity();
      s.Z[b].setIdentity();
    }
    s.y = VectorXd::Zero(static_cast<Eigen::Index>(m_));

    SdpSolution out;
    best_state_ = s;
    best_merit_ = std::numeric_limits<double>::infinity();
    double ref_merit = std::numeric_limits<double>::infinity();
    int since_ref = 0;
    for (int it = 0; it < opts_.max_iterations; ++it) {
      out.iterations = it;
      Residuals res = residuals(s);
      double mu = complementarity(s);

      double m = merit(s, res);
      if (m < best_merit_) {
        best_merit_ = m;
        best_state_ = s;
      }
      if (m < 0.9 * ref_merit) {
        ref_merit = m;
        since_ref = 0;
      } else if (++since_ref > 20) {
        stall(s, out, "merit stagnated");
        return out;
      }

      if (check_convergence(s, res, out)) return out;
      if (check_infeasible(s, out)) return out;

      Scaling sc;
      if (!nt_scaling(s.X, s.Z, sc)) {
        stall(s, out, "NT scaling failed (iterates lost positive definiteness)");
        return out;
      }
      if (!build_schur(sc)) {
        stall(s, out, "Schur complement factorization failed");
        return out;
      }

      // Predictor (affine scaling) direction.
      std::vector<MatrixXd> Rc = zeros_like(p_.block_sizes);
      for (std::size_t b = 0; b < Rc.size(); ++b)
        Rc[b] = MatrixXd((-sc.lambda[b]).asDiagonal());
      Step aff = solve_newton(s, sc, res, Rc, -s.tau * s.kappa);
      if (!aff.ok) {
        stall(s, out, "Newton system breakdown");
        return out;
      }
      double alpha_aff = step_length(s, aff);
      double mu_aff = trial_mu(s, aff, alpha_aff);
      double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3.0);

      // Corrector: target sigma*mu with the Mehrotra second-order term.
      for (std::size_t b = 0; b < Rc.size(); ++b) {
        MatrixXd Dx = sc.Ginv[b] * aff.dX[b] * sc.Ginv[b].transpose();
        MatrixXd Dz = sc.G[b].transpose() * aff.dZ[b] * sc.G[b];
        MatrixXd H = 0.5 * (Dx * Dz + Dz * Dx);
        const VectorXd& lam = sc.lambda[b];
        MatrixXd R(lam.size(), lam.size());
        for (Eigen::Index i = 0; i < lam.size(); ++i)
          for (Eigen::Index j = 0; j < lam.size(); ++j) {
            double target = (i == j ? sigma * mu - lam(i) * lam(i) : 0.0) - H(i, j);
            R(i, j) = 2.0 * target / (lam(i) + lam(j));
          }
        Rc[b] = 0.5 * (R + R.transpose());
      }
      double rtk = sigma * mu - s.tau * s.kappa - aff.dtau * aff.dkappa;
      Step step = solve_newton(s, sc, res, Rc, rtk);
      if (!step.ok) {
        stall(s, out, "Newton system breakdown");
        return out;
      }

      if (opts_.verbose) {
        // Newton consistency: (N1), (N2), (N3), (N5) must hold to round-off.
        VectorXd n1 = -res.rp;
        for (std::size_t i = 0; i < m_; ++i)
          n1(static_cast<Eigen::Index>(i)) += dot_sparse(p_.constraints[i], step.dX);
        n1 -= step.dtau * p_.b;
        auto n2 = zeros_like(p_.block_sizes);
        add_dense(n2, p_.objective, step.dtau);
        for (std::size_t i = 0; i < m_; ++i)
          add_dense(n2, p_.constraints[i], -step.dy(static_cast<Eigen::Index>(i)));
        for (std::size_t b = 0; b < n2.size(); ++b) n2[b] += res.Rd[b] - step.dZ[b];
        double n3 = step.dkappa + dot_sparse(p_.objective, step.dX) - p_.b.dot(step.dy) + res.rg;
        double n5 = s.tau * step.dkappa + s.kappa * step.dtau - rtk;
        std::cerr << "  newton res: n1 " << n1.norm() << " n2 " << frob_norm(n2) << " n3 " << n3
                  << " n5 " << n5 << "\n";
      }
      double alpha = 0.99 * step_length(s, step);
      alpha = std::min(alpha, 1.0);
      if (alpha < 1e-10) {
        stall(s, out, "step length collapsed");
        return out;
      }
      apply(s, step, alpha);
      if (opts_.verbose)
        std::cerr << "iter " << it << " mu " << complementarity(s) << " tau " << s.tau << " kappa " << s.kappa
                  << " alpha " << alpha << "\n";
    }
    {
      if (best_state_.tau > 1e-9 * std::max(1.0, best_state_.kappa)) {
        clean_primal(best_state_);
        clean_dual(best_state_);
      }
      Residuals res = residuals(best_state_);
      if (check_convergence(best_state_, res, out)) return out;
    }
    out.status = SdpStatus::IterationLimit;
    out.detail = "iteration cap reached";
    finalize(best_state_, out);
    return out;
  }

 private:
  struct Step {
    std::vector<MatrixXd> dX, dZ;
    VectorXd dy;
    double dtau = 0, dkappa = 0;
    bool ok = false;
  };

  double complementarity(const IpmState& s) const {
    double dot = s.tau * s.kappa;
    for (std::size_t b = 0; b < s.X.size(); ++b) dot += (s.X[b].array() * s.Z[b].array()).sum();
    return dot / static_cast<double>(total_dim_ + 1);
  }

  Residuals residuals(const IpmState& s) const {
    Residuals r;
    r.rp = s.tau * p_.b;
    for (std::size_t i = 0; i < m_; ++i)
      r.rp(static_cast<Eigen::Index>(i)) -= dot_sparse(p_.constraints[i], s.X);
    r.Rd = zeros_like(p_.block_sizes);
    add_dense(r.Rd, p_.objective, s.tau);
    for (std::size_t i = 0; i < m_; ++i)
      add_dense(r.Rd, p_.constraints[i], -s.y(static_cast<Eigen::Index>(i)));
    for (std::size_t b = 0; b < r.Rd.size(); ++b) r.Rd[b] -= s.Z[b];
    double cx = dot_sparse(p_.objective, s.X);
    r.rg = s.kappa + cx - p_.b.dot(s.y);
    return r;
  }

  bool build_schur(const Scaling& sc) {
    S_.setZero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(m_));
    u_.setZero(static_cast<Eigen::Index>(m_));
    // WCW per block, reused for u and the tau column.
    WCW_ = zeros_like(p_.block_sizes);
    for (std::size_t b = 0; b < WCW_.size(); ++b) WCW_[b] = sc.W[b] * Cd_[b] * sc.W[b];
    cwc_ = 0;
    for (std::size_t b = 0; b < WCW_.size(); ++b) cwc_ += (Cd_[b].array() * WCW_[b].array()).sum();
    for (std::size_t j = 0; j < m_; ++j) {
      auto WAW = conjugate_by_W(sc, p_.constraints[j]);
      for (std::size_t i = 0; i <= j; ++i) {
        double v = 0;
        for (const auto& mat : p_.constraints[i])
          for (const auto& e : mat.entries) {
            double w = WAW[static_cast<std::size_t>(mat.block)](e.row, e.col);
            v += (e.row == e.col) ? e.value * w : 2.0 * e.value * w;
          }
        S_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        S_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
      }
      u_(static_cast<Eigen::Index>(j)) = dot_sparse(p_.constraints[j], WCW_);
    }
    // Tiny Tikhonov term keeps the factorization alive under redundant constraints.
    double reg = 1e-13 * std::max(1.0, S_.trace() / std::max<double>(1, static_cast<double>(m_)));
    for (std::size_t i = 0; i < m_; ++i) S_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += reg;
    schur_ldlt_.compute(S_);
    return schur_ldlt_.info() == Eigen::Success;
  }

  std::vector<MatrixXd> conjugate_by_W(const Scaling& sc, const std::vector<RealMat>& mats) const {
    auto out = zeros_like(p_.block_sizes);
    for (const auto& m : mats) {
      const MatrixXd& W = sc.W[static_cast<std::size_t>(m.block)];
      MatrixXd AW = MatrixXd::Zero(W.rows(), W.cols());
      for (const auto& e : m.entries) {
        AW.row(e.row) += e.value * W.row(e.col);
        if (e.row != e.col) AW.row(e.col) += e.value * W.row(e.row);
      }
      out[static_cast<std::size_t>(m.block)] += W * AW;
    }
    return out;
  }

  VectorXd schur_solve(const VectorXd& rhs) const {
    VectorXd x = schur_ldlt_.solve(rhs);
    // Iterative refinement; the Schur system turns ill-conditioned as the
    // barrier parameter collapses.
    for (int pass = 0; pass < 2; ++pass) {
      VectorXd r = rhs - S_ * x;
      x += schur_ldlt_.solve(r);
    }
    return x;
  }

  Step solve_newton(const IpmState& s, const Scaling& sc, const Residuals& res,
                    const std::vector<MatrixXd>& Rc, double rtk) {
    Step st;
    // Xi = G Rc G^T - W Rd W  (the Delta-Z-independent part of Delta X).
    std::vector<MatrixXd> Xi = zeros_like(p_.block_sizes);
    for (std::size_t b = 0; b < Xi.size(); ++b)
      Xi[b] = sc.G[b] * Rc[b] * sc.G[b].transpose() - sc.W[b] * res.Rd[b] * sc.W[b];

    VectorXd r1 = res.rp;
    for (std::size_t i = 0; i < m_; ++i)
      r1(static_cast<Eigen::Index>(i)) -= dot_sparse(p_.constraints[i], Xi);
    double cXi = 0;
    for (std::size_t b = 0; b < Xi.size(); ++b) cXi += (Cd_[b].array() * Xi[b].array()).sum();
    double r2 = res.rg + cXi + rtk / s.tau;

    VectorXd sr1 = schur_solve(r1);
    VectorXd ub = u_ + p_.b;
    VectorXd sub = schur_solve(ub);
    VectorXd bu = p_.b - u_;
    double denom = cwc_ + s.kappa / s.tau + bu.dot(sub);
    if (!std::isfinite(denom) || std::abs(denom) < 1e-300) return st;
    st.dtau = (r2 - bu.dot(sr1)) / denom;
    st.dy = sr1 + st.dtau * sub;

    st.dZ = zeros_like(p_.block_sizes);
    add_dense(st.dZ, p_.objective, st.dtau);
    for (std::size_t i = 0; i < m_; ++i)
      add_dense(st.dZ, p_.constraints[i], -st.dy(static_cast<Eigen::Index>(i)));
    for (std::size_t b = 0; b < st.dZ.size(); ++b) st.dZ[b] += res.Rd[b];

    // Delta X = G Rc G^T - W Delta Z W; Xi already carries the -W Rd W part.
    st.dX = Xi;
    for (std::size_t b = 0; b < st.dX.size(); ++b) {
      st.dX[b] += sc.W[b] * (res.Rd[b] - st.dZ[b]) * sc.W[b];
      st.dX[b] = 0.5 * (st.dX[b] + st.dX[b].transpose().eval());
      st.dZ[b] = 0.5 * (st.dZ[b] + st.dZ[b].transpose().eval());
    }
    st.dkappa = (rtk - s.kappa * st.dtau) / s.tau;
    st.ok = true;
    return st;
  }

  double step_length(const IpmState& s, const Step& st) const {
    double alpha = 1.0 / 0.99;  // allow a full combined step after the 0.99 damping
    for (std::size_t b = 0; b < s.X.size(); ++b) {
      alpha = std::min(alpha, max_step(s.X[b], st.dX[b]));
      alpha = std::min(alpha, max_step(s.Z[b], st.dZ[b]));
    }
    if (st.dtau < 0) alpha = std::min(alpha, -s.tau / st.dtau);
    if (st.dkappa < 0) alpha = std::min(alpha, -s.kappa / st.dkappa);
    return alpha;
  }

  double trial_mu(const IpmState& s, const Step& st, double alpha_raw) const {
    double alpha = std::min(1.0, 0.99 * alpha_raw);
    double dot = (s.tau + alpha * st.dtau) * (s.kappa + alpha * st.dkappa);
    for (std::size_t b = 0; b < s.X.size(); ++b)
      dot += ((s.X[b] + alpha * st.dX[b]).array() * (s.Z[b] + alpha * st.dZ[b]).array()).sum();
    return dot / static_cast<double>(total_dim_ + 1);
  }

  void apply(IpmState& s, const Step& st, double alpha) {
    for (std::size_t b = 0; b < s.X.size(); ++b) {
      s.X[b] += alpha * st.dX[b];
      s.Z[b] += alpha * st.dZ[b];
      s.X[b] = 0.5 * (s.X[b] + s.X[b].transpose().eval());
      s.Z[b] = 0.5 * (s.Z[b] + s.Z[b].transpose().eval());
    }
    s.y += alpha * st.dy;
    s.tau += alpha * st.dtau;
    s.kappa += alpha * st.dkappa;
  }

  double merit(const IpmState& s, const Residuals& res) const {
    if (s.tau < 1e-12) return std::numeric_limits<double>::infinity();
    double pobj = dot_sparse(p_.objective, s.X) / s.tau;
    double dobj = p_.b.dot(s.y) / s.tau;
    double pres = (res.rp / s.tau).norm() / normb_;
    double dres = frob_norm(res.Rd) / s.tau / normC_;
    double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    return std::max({pres, dres, relgap});
  }

  // A numerical breakdown is only a failure if the best iterate seen has not
  // already met the requested tolerances (after the exact primal projection).
  void stall(IpmState& s, SdpSolution& out, const std::string& why) {
    IpmState& pick = merit(best_state_, residuals(best_state_)) < merit(s, residuals(s)) ? best_state_ : s;
    if (pick.tau > 1e-9 * std::max(1.0, pick.kappa)) {
      clean_primal(pick);
      clean_dual(pick);
    }
    Residuals res = residuals(pick);
    if (check_convergence(pick, res, out)) return;
    if (check_infeasible(pick, out)) return;
    out.status = SdpStatus::Inaccurate;
    out.detail = why;
    finalize(pick, out);
  }

  bool check_convergence(const IpmState& s, const Residuals& res, SdpSolution& out) {
    if (s.tau < 1e-10) return false;
    double pobj = dot_sparse(p_.objective, s.X) / s.tau;
    double dobj = p_.b.dot(s.y) / s.tau;
    double pres = (res.rp / s.tau).norm() / normb_;
    double dres = frob_norm(res.Rd) / s.tau / normC_;
    double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
    if (pres <= opts_.tol_feas && dres <= opts_.tol_feas && relgap <= opts_.tol_gap) {
      out.status = SdpStatus::Optimal;
      IpmState sc = s;
      finalize(sc, out);
      return true;
    }
    return false;
  }

  bool check_infeasible(const IpmState& s, SdpSolution& out) {
    // tau -> 0 with kappa bounded away signals an infeasibility certificate.
    if (s.tau > 1e-9 * std::max(1.0, s.kappa)) return false;
    double by = p_.b.dot(s.y);
    double cx = dot_sparse(p_.objective, s.X);
    out.status = SdpStatus::Infeasible;
    if (by > 0) {
      out.detail = "primal infeasible (improving dual ray attached)";
      out.dual = s.y / by;
      out.dual_slack.clear();
      for (std::size_t b = 0; b < s.Z.size(); ++b) out.dual_slack.push_back((s.Z[b] / by).cast<Complex>());
      out.primal.clear();
    } else if (cx < 0) {
      out.detail = "dual infeasible / primal unbounded (improving primal ray attached)";
      out.primal.clear();
      for (std::size_t b = 0; b < s.X.size(); ++b) out.primal.push_back((s.X[b] / (-cx)).cast<Complex>());
      out.dual = s.y;
    } else {
      out.status = SdpStatus::Inaccurate;
      out.detail = "tau collapsed without a certificate";
    }
    return true;
  }

  // Frobenius projection of X onto the affine set A(X) = b tau; the interior
  // point stalls around sqrt(eps) on degenerate problems while the projection
  // is exact, which is what extracted certificates inherit.
  void clean_primal(IpmState& s) {
    const auto m = m_;
    if (m == 0) return;
    if (gram_AAt_.size() == 0) {
      gram_AAt_.setZero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
      for (std::size_t j = 0; j < m; ++j) {
        auto dense_j = zeros_like(p_.block_sizes);
        add_dense(dense_j, p_.constraints[j], 1.0);
        for (std::size_t i = 0; i <= j; ++i) {
          double v = dot_sparse(p_.constraints[i], dense_j);
          gram_AAt_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
          gram_AAt_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
      }
      double reg = 1e-12 * std::max(1.0, gram_AAt_.trace() / static_cast<double>(m));
      for (std::size_t i = 0; i < m; ++i)
        gram_AAt_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += reg;
      gram_ldlt_.compute(gram_AAt_);
    }
    for (int pass = 0; pass < 2; ++pass) {
      VectorXd viol(static_cast<Eigen::Index>(m));
      for (std::size_t i = 0; i < m; ++i)
        viol(static_cast<Eigen::Index>(i)) = dot_sparse(p_.constraints[i], s.X) - s.tau * p_.b(static_cast<Eigen::Index>(i));
      VectorXd lam = gram_ldlt_.solve(viol);
      for (std::size_t i = 0; i < m; ++i)
        add_dense(s.X, p_.constraints[i], -lam(static_cast<Eigen::Index>(i)));
    }
  }

  // Exact dual feasibility: the slack is defined by y, so rebuilding it
  // zeroes the dual residual; psd dips stay at the size of the old residual.
  void clean_dual(IpmState& s) {
    auto Z = zeros_like(p_.block_sizes);
    add_dense(Z, p_.objective, s.tau);
    for (std::size_t i = 0; i < m_; ++i)
      add_dense(Z, p_.constraints[i], -s.y(static_cast<Eigen::Index>(i)));
    s.Z = std::move(Z);
  }

  void finalize(IpmState& s, SdpSolution& out) {
    double tau = std::max(s.tau, 1e-300);
    if (out.status == SdpStatus::Optimal) clean_primal(s);
    if (out.status == SdpStatus::Optimal || out.status == SdpStatus::Inaccurate ||
        out.status == SdpStatus::IterationLimit) {
      out.primal.clear();
      out.dual_slack.clear();
      for (std::size_t b = 0; b < s.X.size(); ++b) {
        out.primal.push_back((s.X[b] / tau).cast<Complex>());
        out.dual_slack.push_back((s.Z[b] / tau).cast<Complex>());
      }
      out.dual = s.y / tau;
      Residuals res = residuals(s);
      out.primal_obj = dot_sparse(p_.objective, s.X) / tau;
      out.dual_obj = p_.b.dot(s.y) / tau;
      out.gap = std::abs(out.primal_obj - out.dual_obj);
      out.primal_residual = (res.rp / tau).norm();
      out.dual_residual = frob_norm(res.Rd) / tau;
    }
  }

  const RealProblem& p_;
  SdpOptions opts_;
  std::size_t m_ = 0;
  long total_dim_ = 0;
  std::vector<MatrixXd> Cd_, WCW_;
  double normC_ = 1, normb_ = 1, cwc_ = 0;
  MatrixXd S_;
  VectorXd u_;
  Eigen::LDLT<MatrixXd> schur_ldlt_;
  MatrixXd gram_AAt_;
  Eigen::LDLT<MatrixXd> gram_ldlt_;
  IpmState best_state_;
  double best_merit_ = 0;
};

// Projects a realified solution back to complex blocks, averaging over the
// J-symmetry so the complex structure is exact.
CMat fold_back(const CMat& wide) {
  const auto n2 = wide.rows();
  const auto n = n2 / 2;
  Eigen::MatrixXd re = 0.5 * (wide.topLeftCorner(n, n).real() + wide.bottomRightCorner(n, n).real());
  Eigen::MatrixXd im = 0.5 * (wide.bottomLeftCorner(n, n).real() - wide.topRightCorner(n, n).real());
  return re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
}

}  // namespace

SdpProblem realify(const SdpProblem& p) {
  p.validate();
  SdpProblem out;
  for (int n : p.block_sizes) out.block_sizes.push_back(2 * n);
  for (const auto& c : p.constraints) {
    Constraint rc;
    rc.rhs = 2.0 * c.rhs;
    for (auto& rm : realify_mats(c.mats, p.block_sizes)) {
      ConstraintMat cm;
      cm.block = rm.block;
      for (const auto& e : rm.entries) cm.entries.push_back({e.row, e.col, Complex(e.value, 0)});
      rc.mats.push_back(std::move(cm));
    }
    out.constraints.push_back(std::move(rc));
  }
  for (auto& rm : realify_mats(p.objective, p.block_sizes)) {
    ConstraintMat cm;
    cm.block = rm.block;
    for (const auto& e : rm.entries) cm.entries.push_back({e.row, e.col, Complex(e.value, 0)});
    out.objective.push_back(std::move(cm));
  }
  return out;
}

SdpSolution solve(const SdpProblem& problem, const SdpOptions& opts) {
  problem.validate();
  if (problem.constraints.size() > opts.max_constraints)
    throw std::invalid_argument("sdp: constraint count exceeds configured cap");

  bool realified = false;
  RealProblem rp = build_real_problem(problem, realified);
  HsdSolver solver(rp, opts);
  SdpSolution sol = solver.run();

  if (realified) {
    for (auto& X : sol.primal) X = fold_back(X);
    for (auto& Z : sol.dual_slack) Z = fold_back(Z);
    sol.primal_obj /= 2.0;
    sol.dual_obj /= 2.0;
    sol.gap /= 2.0;
    sol.primal_residual /= 2.0;
    sol.dual_residual /= 2.0;
  }
  return sol;
}

CMat psd_factor(const CMat& gram, double rank_tol) {
  if (gram.rows() != gram.cols()) throw std::invalid_argument("psd_factor: matrix must be square");
  CMat H = 0.5 * (gram + gram.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(H);
  const auto& ev = es.eigenvalues();
  double lmax = std::max(0.0, ev.maxCoeff());
  double cut = rank_tol * lmax;
  // Absolute grace keeps blocks with solver-level round-off negatives usable;
  // anything discarded lands in the verified residual, never silently.
  if (ev.minCoeff() < -10.0 * cut - 1e-7)
    throw std::invalid_argument("psd_factor: input is significantly indefinite (lambda_min " +
                                std::to_string(ev.minCoeff()) + ")");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > cut && ev(i) > 0) keep.push_back(i);
  CMat F(static_cast<Eigen::Index>(keep.size()), gram.rows());
  for (std::size_t r = 0; r < keep.size(); ++r)
    F.row(static_cast<Eigen::Index>(r)) = std::sqrt(ev(keep[r])) * es.eigenvectors().col(keep[r]).adjoint();
  return F;
}

}  // namespace ncsos::sdp
