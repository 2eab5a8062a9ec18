// End-to-end positivity check and Fejer-Riesz factorization of operator-valued
// group polynomials on free products of finite cyclic groups: Boca transfer,
// povm membership SDP, certificate pullback through the splitting, and
// witness generation with Naimark dilation on failure.
#pragma once

#include <optional>
#include <string>

#include "ncsos/certify.hpp"
#include "ncsos/groupfree.hpp"

namespace ncsos::fejer {

struct FactorizationOptions {
  certify::DecideOptions decide;
  double tol_result = 1e-6;      // residual gate for the group-algebra identity
  int sample_checks = 100;       // unitary tuples sampled in verification
  std::uint64_t seed = 0;
  std::optional<int> degree_override;
};

struct FactorizationResult {
  std::vector<groupfree::GroupPoly> summands;  // row factors: coefficients map C^nu -> C
  int N = 0;
  int extent_bound = 0;  // floor(extent(p)/2) + 1
  double coeff_residual = 0;
  double sample_margin = 0;  // min lambda_min(p(U)) over sampled unitary tuples
};

enum class Status { Positive, NotPositive, Inaccurate };

std::string to_string(Status s);

struct Witness {
  groupfree::PovmTuple E;
  Eigen::VectorXcd xi;
  double povm_value = 0;  // <Omega(p)(E) xi, xi>
  std::optional<groupfree::UnitaryTuple> U;
  std::optional<CMat> V;         // Naimark isometry
  double unitary_value = 0;      // lambda_min(p(U)) when U is present
  bool unitary_verified = false; // dilated witness reproduces negativity
};

struct Verdict {
  Status status = Status::Inaccurate;
  std::optional<FactorizationResult> factorization;
  std::optional<Witness> witness;
  double shift_opt = 0;
  std::string detail;
};

// Runs the full pipeline: extent -> Omega -> membership SDP on the povm pencil
// at d = floor(extent/2) -> factors -> splitting -> summands, or GNS + Naimark
// witness extraction on the negative side.
Verdict factorize(const groupfree::GroupPoly& p, const FactorizationOptions& opts = {});

// Same SDP; wraps factorize and always attaches the Naimark-dilated unitary
// witness attempt on the negative side.
Verdict check_positive(const groupfree::GroupPoly& p, const FactorizationOptions& opts = {});

}  // namespace ncsos::fejer
