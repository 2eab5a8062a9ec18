#include "ncsos/fejer.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace ncsos::fejer {

using groupfree::FreeProductSignature;
using groupfree::GroupPoly;
using groupfree::PovmTuple;

std::string to_string(Status s) {
  switch (s) {
    case Status::Positive: return "Positive";
    case Status::NotPositive: return "NotPositive";
    case Status::Inaccurate: return "Inaccurate";
  }
  return "?";
}

namespace {

// Splits a matrix-coefficient factor into row polynomials, pulls each through
// the splitting map and multiplies by the weight projection (empty = none).
void append_summands(std::vector<GroupPoly>& out, const NCPoly& factor, const FreeProductSignature& sig,
                     double scale, const GroupPoly* projection) {
  const int nu = factor.cols();
  for (int row = 0; row < factor.rows(); ++row) {
    NCPoly row_poly(factor.g(), 1, nu);
    for (const auto& [w, c] : factor.terms()) row_poly.add_term(w, scale * c.row(row));
    row_poly = row_poly.pruned(1e-16);
    if (row_poly.is_zero()) continue;
    GroupPoly q = groupfree::split_map(row_poly, sig);
    if (projection) q = (*projection) * q;
    q = q.pruned(1e-16);
    if (!q.is_zero()) out.push_back(std::move(q));
  }
}

double sample_evaluation_margin(const GroupPoly& p, int n_samples, std::uint64_t seed) {
  double margin = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  for (int i = 0; i < n_samples; ++i) {
    int l = 1 + static_cast<int>(rng.uniform_below(3));
    auto U = groupfree::sample_unitary_tuple(p.signature(), l, rng.next_u64());
    margin = std::min(margin, min_eigenvalue(p.evaluate(U.U)));
  }
  return margin;
}

// Clips POVM defects so the tuple meets the Naimark precondition exactly.
PovmTuple project_to_povm(const PovmTuple& in) {
  PovmTuple out = in;
  int idx = 0;
  for (int i = 1; i <= in.sig.num_factors(); ++i) {
    const int n = in.sig.order(i);
    std::vector<CMat> elems;
    for (int j = 1; j < n; ++j) {
      CMat E = 0.5 * (in.E[static_cast<std::size_t>(idx + j - 1)] +
                      in.E[static_cast<std::size_t>(idx + j - 1)].adjoint());
      Eigen::SelfAdjointEigenSolver<CMat> es(E);
      elems.push_back(es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
                      es.eigenvectors().adjoint());
    }
    CMat sum = CMat::Zero(elems[0].rows(), elems[0].cols());
    for (const auto& E : elems) sum += E;
    double lmax = min_eigenvalue(CMat::Identity(sum.rows(), sum.cols()) - sum);
    if (lmax < 0) {
      double scale = 1.0 / (1.0 - lmax + 1e-15);
      for (auto& E : elems) E *= scale;
    }
    for (int j = 0; j < n - 1; ++j) out.E[static_cast<std::size_t>(idx + j)] = elems[static_cast<std::size_t>(j)];
    idx += n - 1;
  }
  return out;
}

Verdict run_pipeline(const GroupPoly& p, const FactorizationOptions& opts) {
  Verdict verdict;
  if (!p.is_hermitian(1e-12)) throw std::invalid_argument("factorize: input polynomial is not hermitian");
  const auto& sig = p.signature();
  const int nu = p.coeff_dim();

  const int extent = p.extent();
  int d = extent / 2;
  if (opts.degree_override) {
    if (*opts.degree_override < d)
      throw std::invalid_argument("factorize: degree override below the guaranteed bound");
    d = *opts.degree_override;
  }

  NCPoly omega_p = omega_map(p);
  if (omega_p.degree_or(0) > extent)
    throw std::logic_error("factorize: Omega image degree exceeds the extent");
  // Input self-check: the splitting must invert the Boca transfer exactly.
  double split_err = (groupfree::split_map(omega_p, sig) - p).max_coeff_norm();
  if (split_err > 1e-12)
    throw std::logic_error("factorize: s(Omega(p)) != p (round-trip error " + std::to_string(split_err) + ")");

  LinearPencil pencil = build_povm_pencil(sig.factors);
  const double scale = std::max(1.0, omega_p.max_coeff_norm());
  NCPoly omega_scaled = omega_p * Complex(1.0 / scale, 0);
  auto assembled = certify::assemble_membership_sdp_ex(omega_scaled, pencil, d, d, /*with_shift=*/true,
                                                       /*require_monic=*/false);
  auto sol = sdp::solve(assembled.problem, opts.decide.sdp);
  bool usable = sol.status == sdp::SdpStatus::Optimal ||
                ((sol.status == sdp::SdpStatus::Inaccurate || sol.status == sdp::SdpStatus::IterationLimit) &&
                 sol.primal_residual <= 1e-6 && sol.dual_residual <= 1e-5 && sol.gap <= 1e-5);
  if (!usable) {
    verdict.status = Status::Inaccurate;
    verdict.detail = "membership solve " + sdp::to_string(sol.status) + ": " + sol.detail;
    return verdict;
  }
  verdict.shift_opt = scale * sol.primal_obj;

  if (sol.primal_obj <= opts.decide.shift_positive) {
    certify::MembershipProblem mp{omega_scaled, pencil, d};
    certify::Certificate cert;
    try {
      try {
        cert = certify::extract_certificate(mp, assembled, sol, opts.decide.rank_tol);
      } catch (const std::invalid_argument&) {
        cert = certify::extract_certificate(mp, assembled, sol, 100 * opts.decide.rank_tol);
      }
    } catch (const std::exception& e) {
      verdict.status = Status::Inaccurate;
      verdict.detail = std::string("certificate extraction failed: ") + e.what();
      return verdict;
    }
    cert.r = cert.r * Complex(std::sqrt(scale), 0);
    for (auto& q : cert.q_blocks) q = q * Complex(std::sqrt(scale), 0);

    FactorizationResult result;
    result.extent_bound = extent / 2 + 1;
    append_summands(result.summands, cert.r, sig, 1.0, nullptr);
    int block = 0;
    for (int i = 1; i <= sig.num_factors(); ++i) {
      const int n = sig.order(i);
      double w = std::sqrt(static_cast<double>(n));
      for (int j = 1; j <= n; ++j, ++block) {
        GroupPoly proj = groupfree::spectral_projection(sig, i, j);
        append_summands(result.summands, cert.q_blocks[static_cast<std::size_t>(block)], sig, w, &proj);
      }
    }

    // Interior-point Grams are strictly positive, so near-zero factors show up
    // on every block; drop summands whose square is below the residual budget.
    if (!result.summands.empty()) {
      double budget = 0.25 * opts.tol_result / static_cast<double>(result.summands.size());
      std::vector<GroupPoly> kept;
      for (auto& q : result.summands)
        if ((q.adjoint() * q).max_coeff_norm() > budget) kept.push_back(std::move(q));
      result.summands = std::move(kept);
    }
    result.N = static_cast<int>(result.summands.size());

    GroupPoly total(sig, nu, nu);
    for (const auto& q : result.summands) total = total + q.adjoint() * q;
    result.coeff_residual = (p - total).max_coeff_norm();
    result.sample_margin = sample_evaluation_margin(p, opts.sample_checks, opts.seed);

    for (const auto& q : result.summands)
      if (q.extent() > result.extent_bound)
        throw std::logic_error("factorize: summand extent exceeds the structural bound");
    long count_bound = 0;
    for (int ni : sig.factors) count_bound += ni;
    count_bound *= static_cast<long>(nu) * static_cast<long>(words_up_to(sig.povm_variables(), extent));
    if (result.N > count_bound) throw std::logic_error("factorize: summand count exceeds the structural bound");

    if (result.coeff_residual <= opts.tol_result) {
      verdict.status = Status::Positive;
      verdict.factorization = std::move(result);
    } else {
      verdict.status = Status::Inaccurate;
      verdict.factorization = std::move(result);
      verdict.detail = "factorization residual " + std::to_string(verdict.factorization->coeff_residual) +
                       " exceeds tolerance";
    }
    return verdict;
  }

  if (sol.primal_obj < opts.decide.shift_negative || sol.gap > 0.5 * sol.primal_obj) {
    verdict.status = Status::Inaccurate;
    verdict.detail = "shift optimum " + std::to_string(verdict.shift_opt) + " lies in the ambiguous band";
    return verdict;
  }

  // Negative side: separation-form solve, GNS moments, povm witness, dilation.
  auto sep = certify::assemble_membership_sdp_ex(omega_scaled, pencil, d, d + 1, /*with_shift=*/true,
                                                 /*require_monic=*/false);
  auto sol2 = sdp::solve(sep.problem, opts.decide.sdp);
  bool usable2 = sol2.status == sdp::SdpStatus::Optimal ||
                 ((sol2.status == sdp::SdpStatus::Inaccurate || sol2.status == sdp::SdpStatus::IterationLimit) &&
                  sol2.primal_residual <= 1e-6 && sol2.dual_residual <= 1e-5 && sol2.gap <= 1e-5);
  if (!usable2) {
    verdict.status = Status::Inaccurate;
    verdict.detail = "separation solve " + sdp::to_string(sol2.status) + ": " + sol2.detail;
    return verdict;
  }
  try {
    certify::MembershipProblem mp{omega_p, pencil, d};
    auto moments = certify::dual_to_moments(sep, sol2.dual);
    std::vector<double> ladder{opts.decide.rank_tol};
    for (double c : {1e-5, 1e-4})
      if (c > opts.decide.rank_tol) ladder.push_back(c);
    certify::MomentWitness gns;
    for (double cut : ladder) {
      gns = certify::gns_witness(mp, moments, opts.decide.tol_witness, opts.decide.tol_witness, cut);
      if (gns.accurate) break;
    }
    if (!gns.accurate) {
      verdict.status = Status::Inaccurate;
      verdict.detail = "witness inaccurate (value " + std::to_string(gns.value) + ", pencil margin " +
                       std::to_string(gns.pencil_min_eig) + ")";
      return verdict;
    }

    Witness wit;
    wit.E = PovmTuple{sig, gns.Y};
    double norm = gns.gamma.norm();
    wit.xi = gns.gamma / norm;
    wit.povm_value = gns.value / (norm * norm);

    try {
      PovmTuple E_for_dilation = wit.E;
      if (E_for_dilation.validity_margin() < -1e-8) E_for_dilation = project_to_povm(E_for_dilation);
      auto dil = groupfree::naimark_dilate(E_for_dilation);
      wit.unitary_value = min_eigenvalue(p.evaluate(dil.U.U));
      wit.unitary_verified = wit.unitary_value <= -1e-8;
      wit.U = std::move(dil.U);
      wit.V = std::move(dil.V);
    } catch (const std::exception&) {
      wit.unitary_verified = false;
    }
    verdict.status = Status::NotPositive;
    verdict.witness = std::move(wit);
    if (!verdict.witness->unitary_verified)
      verdict.detail = "povm witness only: the dilated unitary tuple did not reproduce the negativity";
  } catch (const std::exception& e) {
    verdict.status = Status::Inaccurate;
    verdict.detail = std::string("witness extraction failed: ") + e.what();
  }
  return verdict;
}

}  // namespace

Verdict factorize(const GroupPoly& p, const FactorizationOptions& opts) { return run_pipeline(p, opts); }

Verdict check_positive(const GroupPoly& p, const FactorizationOptions& opts) { return run_pipeline(p, opts); }

}  // namespace ncsos::fejer
