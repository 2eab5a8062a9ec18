// Weighted sum-of-squares membership: SDP assembly at the optimal degree,
// certificate extraction and verification, variable bounds on bounded
// spectrahedra, and GNS witness extraction from dual moment data.
#pragma once

#include <optional>
#include <utility>

#include "ncsos/ncpoly.hpp"
#include "ncsos/pencil.hpp"
#include "ncsos/sdp.hpp"

namespace ncsos::certify {

// p hermitian of degree D, monic L; certificate degree d = ceil((D-1)/2)
// (0 for constants), so that D <= 2d+1.
struct MembershipProblem {
  NCPoly p;
  LinearPencil L;
  int d = 0;
};

MembershipProblem make_membership(const NCPoly& p, const LinearPencil& L,
                                  std::optional<int> degree_override = std::nullopt);

// One scalar equality: the (s, t) entry of the word-w block constraint,
// real or imaginary part.  Words are indexed into AssembledSdp::cons_words.
struct ConstraintKey {
  std::size_t word = 0;
  int s = 0;
  int t = 0;
  bool imag_part = false;
};

// Block layout: 0 = SOS Gram over V_{sos_degree}; 1..K = localizing Grams
// over V_d per pencil block; if shifted, two trailing 1x1 blocks encode the
// free scalar of min t s.t. p + t*1 in cone.
struct AssembledSdp {
  sdp::SdpProblem problem;
  WordBasis gram_basis;
  WordBasis loc_basis;
  WordBasis cons_words;
  std::vector<ConstraintKey> keys;
  int nu = 1;
  int sos_degree = 0;
  bool shifted = false;
};

// The canonical membership SDP: SOS Gram over V_d, localizing Gram per
// declared block, one block equality per word of length <= 2d+1, zero
// objective (pure feasibility).
AssembledSdp assemble_membership_sdp(const MembershipProblem& mp);

// General assembly used by the pipeline: sos_degree in {d, d+1} selects the
// certificate cone or the separation cone of the GNS route; with_shift adds
// the eigenvalue-shift variable and objective.  Non-monic hermitian-block
// pencils are accepted (the povm pencil route; see monicize).
AssembledSdp assemble_membership_sdp_ex(const NCPoly& p, const LinearPencil& L, int d, int sos_degree,
                                        bool with_shift, bool require_monic = true);

struct Certificate {
  NCPoly r;                       // coefficients map C^nu -> C^rank
  std::vector<NCPoly> q_blocks;   // per pencil block: C^nu -> C^{mu_k * rank_k}
  std::vector<int> q_ranks;
  double residual = 0;
};

Certificate extract_certificate(const MembershipProblem& mp, const AssembledSdp& assembled,
                                const sdp::SdpSolution& sol, double rank_tol = 1e-8);

// Symbolic residual of p - r*r - sum_k q_k* L_k q_k plus the minimum
// eigenvalue of p over sampled points of D_L.
std::pair<double, double> verify_certificate(const NCPoly& p, const LinearPencil& L, const Certificate& cert,
                                             int n_samples, std::uint64_t seed);

// Recomputes sum_k q_k* L_k q_k + r*r.
NCPoly certificate_polynomial(const LinearPencil& L, const Certificate& cert);

// The dual vector read back as a word-indexed family S_w, sign-normalized so
// that the induced functional phi(p) = sum_w tr(S_w P_w) is nonnegative on
// the cone and phi(1) = tr(S_empty) = 1 at a shifted optimum.
struct MomentData {
  WordBasis words;
  std::vector<CMat> S;
  int nu = 1;
};

MomentData dual_to_moments(const AssembledSdp& assembled, const Eigen::VectorXd& y);

Complex moment_pairing_complex(const MomentData& moments, const NCPoly& p);
double moment_pairing(const MomentData& moments, const NCPoly& p);

struct MomentWitness {
  CMat S_big;                // moment block matrix over WordBasis(d+1)
  std::vector<CMat> Y;       // hermitian tuple on the compressed space
  Eigen::VectorXcd gamma;
  double value = 0;          // <p(Y) gamma, gamma>
  double pencil_min_eig = 0; // lambda_min(L(Y))
  bool accurate = false;
};

// Spec tolerances: S >= -tol as a matrix, witness accepted when value < 0 and
// lambda_min(L(Y)) >= -tol_witness.
MomentWitness gns_witness(const MembershipProblem& mp, const MomentData& moments, double tol = 1e-6,
                          double tol_witness = 1e-6, double rank_tol = 1e-8);

struct BoundResult {
  bool bounded = false;
  double c = 0;
  std::optional<Certificate> cert_plus;   // for c + x_j
  std::optional<Certificate> cert_minus;  // for c - x_j
};

BoundResult bound_variable(const LinearPencil& L, int j, double cap = 1024.0, double bisect_tol = 1e-3);

enum class Verdict { Positive, NotPositive, Inaccurate };

std::string to_string(Verdict v);

struct DecideOptions {
  // The verdict only needs the shift optimum located relative to the
  // 1e-7/1e-6 thresholds; the exact primal projection protects certificate
  // residuals, so the duality-gap target can sit at 1e-7.
  sdp::SdpOptions sdp{.tol_feas = 1e-8, .tol_gap = 1e-7};
  double tol_cert = 1e-6;       // max certificate residual
  double shift_positive = 1e-7; // t* below this counts as membership
  double shift_negative = 1e-6; // t* above this routes to witness extraction
  double tol_witness = 1e-6;
  double rank_tol = 1e-8;
  int n_samples = 100;
  std::uint64_t seed = 0;
  std::optional<int> degree_override;
};

struct Decision {
  Verdict verdict = Verdict::Inaccurate;
  std::optional<Certificate> certificate;
  std::optional<MomentWitness> witness;
  std::optional<MomentData> moments;
  double shift_opt = 0;  // t*: the amount that must be added to p to enter the cone
  double eval_margin = 0;
  sdp::SdpStatus solver_status = sdp::SdpStatus::Inaccurate;
  std::string detail;
  int degree = 0;
};

Decision decide_membership(const NCPoly& p, const LinearPencil& L, const DecideOptions& opts = {});

}  // namespace ncsos::certify
