#include "ncsos/certify.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <stdexcept>

namespace ncsos::certify {

namespace {

// Complex linear functional on the hermitian blocks, keyed by entry.
struct FunctionalBuilder {
  std::map<std::tuple<int, int, int>, Complex> acc;  // (block, row, col) -> z meaning  f += z * X[row, col]

  void add(int block, int row, int col, Complex z) {
    if (z == Complex(0, 0)) return;
    acc[{block, row, col}] += z;
  }

  // Emits hermitian coefficient matrices with tr(A X) equal to the real or
  // imaginary part of the accumulated functional.
  std::vector<sdp::ConstraintMat> hermitian_part(bool imag) const {
    std::map<int, std::map<std::pair<int, int>, Complex>> per_block;
    for (const auto& [key, z] : acc) {
      auto [blk, r, c] = key;
      // A = (B + B^H)/2 or -i(B - B^H)/2 with B[c][r] = z (so tr(BX) = f(X)).
      Complex h = 0.5 * z;
      if (!imag) {
        add_herm(per_block[blk], c, r, h);
      } else {
        add_herm(per_block[blk], c, r, Complex(0, -1) * h);
      }
    }
    std::vector<sdp::ConstraintMat> out;
    for (const auto& [blk, entries] : per_block) {
      sdp::ConstraintMat cm;
      cm.block = blk;
      for (const auto& [rc, v] : entries) {
        Complex val = v;
        if (rc.first == rc.second) val = Complex(val.real() * 2.0, 0);  // both half-contributions land here
        if (val != Complex(0, 0)) cm.entries.push_back({rc.first, rc.second, val});
      }
      if (!cm.entries.empty()) out.push_back(std::move(cm));
    }
    return out;
  }

 private:
  // Stores h at (r, c) in canonical row <= col form, conjugating as needed.
  static void add_herm(std::map<std::pair<int, int>, Complex>& m, int r, int c, Complex h) {
    if (r <= c)
      m[{r, c}] += h;
    else
      m[{c, r}] += std::conj(h);
  }
};

// ceil((D-1)/2) for D >= 1, which is D/2 in integer arithmetic; 0 for constants.
int ceil_half_degree(int D) { return D <= 0 ? 0 : D / 2; }

}  // namespace

MembershipProblem make_membership(const NCPoly& p, const LinearPencil& L,
                                  std::optional<int> degree_override) {
  if (!p.square()) throw std::invalid_argument("membership: polynomial coefficients must be square");
  if (!p.is_hermitian(1e-12)) throw std::invalid_argument("membership: polynomial is not hermitian");
  if (p.g() != L.g) throw std::invalid_argument("membership: polynomial and pencil alphabet mismatch");
  if (!L.is_monic(1e-12)) throw std::invalid_argument("membership: pencil must be monic");
  MembershipProblem mp{p, L, 0};
  int D = p.degree_or(0);
  mp.d = ceil_half_degree(D);
  if (degree_override) {
    if (*degree_override < mp.d)
      throw std::invalid_argument("membership: degree override below the guaranteed bound");
    mp.d = *degree_override;
  }
  return mp;
}

AssembledSdp assemble_membership_sdp_ex(const NCPoly& p, const LinearPencil& L, int d, int sos_degree,
                                        bool with_shift, bool require_monic) {
  if (!p.square() || !p.is_hermitian(1e-12))
    throw std::invalid_argument("assemble: polynomial must be hermitian");
  if (require_monic && !L.is_monic(1e-12)) throw std::invalid_argument("assemble: pencil must be monic");
  if (p.degree_or(0) > 2 * d + 1) throw std::invalid_argument("assemble: degree overflow (deg p > 2d+1)");
  if (sos_degree != d && sos_degree != d + 1)
    throw std::invalid_argument("assemble: sos degree must be d or d+1");

  const int g = L.g;
  const int nu = p.coeff_dim();

  AssembledSdp out;
  out.nu = nu;
  out.sos_degree = sos_degree;
  out.shifted = with_shift;
  out.gram_basis = WordBasis(g, sos_degree);
  out.loc_basis = WordBasis(g, d);
  out.cons_words = WordBasis(g, sos_degree + d + 1);

  const auto Ns = static_cast<int>(out.gram_basis.size());
  const auto Nd = static_cast<int>(out.loc_basis.size());
  const auto K = static_cast<int>(L.blocks.size());

  auto& prob = out.problem;
  prob.block_sizes.push_back(nu * Ns);
  for (const auto& blk : L.blocks) prob.block_sizes.push_back(blk.size * nu * Nd);
  int shift_plus = -1, shift_minus = -1;
  if (with_shift) {
    shift_plus = K + 1;
    shift_minus = K + 2;
    prob.block_sizes.push_back(1);
    prob.block_sizes.push_back(1);
    sdp::ConstraintMat op, om;
    op.block = shift_plus;
    op.entries.push_back({0, 0, Complex(1, 0)});
    om.block = shift_minus;
    om.entries.push_back({0, 0, Complex(-1, 0)});
    prob.objective.push_back(op);
    prob.objective.push_back(om);
  }

  // Per constraint word: the complex functional LHS_w[s,t] as entry lists.
  // Contribution lists are block-level: (block id, base row, base col, z)
  // meaning LHS_w[s,t] += z * X[base_row + s, base_col + t].
  struct Contribution {
    int block, base_row, base_col;
    Complex z;
  };
  std::vector<std::vector<Contribution>> contrib(out.cons_words.size());

  for (int ui = 0; ui < Ns; ++ui)
    for (int vi = 0; vi < Ns; ++vi) {
      Word w = word_star_concat(out.gram_basis[ui], out.gram_basis[vi]);
      contrib[out.cons_words.index(w)].push_back({0, ui * nu, vi * nu, Complex(1, 0)});
    }

  for (int k = 0; k < K; ++k) {
    const int mu_k = L.blocks[static_cast<std::size_t>(k)].size;
    for (int j = 0; j <= g; ++j) {
      CMat Akj = L.block_coeff(k, j);
      if (Akj.isZero(0.0)) continue;
      for (int ui = 0; ui < Nd; ++ui)
        for (int vi = 0; vi < Nd; ++vi) {
          Word w;
          if (j == 0) {
            w = word_star_concat(out.loc_basis[ui], out.loc_basis[vi]);
          } else {
            Word mid = out.loc_basis[vi];
            mid.insert(mid.begin(), j);
            w = word_star_concat(out.loc_basis[ui], mid);
          }
          auto& bucket = contrib[out.cons_words.index(w)];
          for (int a = 0; a < mu_k; ++a)
            for (int b = 0; b < mu_k; ++b) {
              if (Akj(a, b) == Complex(0, 0)) continue;
              bucket.push_back({k + 1, (ui * mu_k + a) * nu, (vi * mu_k + b) * nu, Akj(a, b)});
            }
        }
    }
  }

  // One block equality per word; only the graded-lex canonical representative
  // of {w, w*} is constrained, the other follows by hermiticity.
  GradedLexLess less;
  for (std::size_t wi = 0; wi < out.cons_words.size(); ++wi) {
    const Word& w = out.cons_words[wi];
    Word wstar = word_reverse(w);
    if (less(wstar, w)) continue;  // w* is the canonical one
    bool self_adjoint = (wstar == w);
    CMat Pw = p.coefficient(w);

    for (int s = 0; s < nu; ++s)
      for (int t = 0; t < nu; ++t) {
        if (self_adjoint && t < s) continue;  // (t,s) is the conjugate equality
        FunctionalBuilder fb;
        for (const auto& c : contrib[wi]) fb.add(c.block, c.base_row + s, c.base_col + t, c.z);
        bool diagonal_real_only = self_adjoint && s == t;
        if (with_shift && w.empty() && s == t) {
          fb.add(shift_plus, 0, 0, Complex(-1, 0));
          fb.add(shift_minus, 0, 0, Complex(1, 0));
        }

        sdp::Constraint re;
        re.mats = fb.hermitian_part(false);
        re.rhs = Pw(s, t).real();
        prob.constraints.push_back(std::move(re));
        out.keys.push_back({wi, s, t, false});

        if (!diagonal_real_only) {
          sdp::Constraint im;
          im.mats = fb.hermitian_part(true);
          im.rhs = Pw(s, t).imag();
          prob.constraints.push_back(std::move(im));
          out.keys.push_back({wi, s, t, true});
        }
      }
  }

  prob.validate();
  return out;
}

AssembledSdp assemble_membership_sdp(const MembershipProblem& mp) {
  return assemble_membership_sdp_ex(mp.p, mp.L, mp.d, mp.d, /*with_shift=*/false);
}

Certificate extract_certificate(const MembershipProblem& mp, const AssembledSdp& assembled,
                                const sdp::SdpSolution& sol, double rank_tol) {
  // Sub-tolerance iterates are fine to extract from: the residual is
  // recomputed symbolically and gated by the caller.
  if (sol.primal.size() < 1 + mp.L.blocks.size() + (assembled.shifted ? 2 : 0))
    throw std::invalid_argument("extract_certificate: solution carries no primal iterate");
  const int nu = assembled.nu;
  const auto& gb = assembled.gram_basis;
  const auto& lb = assembled.loc_basis;
  const auto& L = mp.L;

  CMat G0 = sol.primal[0];
  if (assembled.shifted) {
    // Fold the shift back into the constant Gram entry (p = assembled - t*1),
    // but only when that keeps the Gram psd; a positive t within the
    // acceptance threshold is left to the verified residual instead.
    double t = sol.primal[sol.primal.size() - 2](0, 0).real() - sol.primal[sol.primal.size() - 1](0, 0).real();
    if (t < 0)
      for (int s = 0; s < nu; ++s) G0(s, s) -= t;  // empty word is basis index 0
  }

  Certificate cert;
  CMat F = sdp::psd_factor(G0, rank_tol);
  NCPoly r(mp.p.g(), static_cast<int>(F.rows()), nu);
  for (std::size_t ui = 0; ui < gb.size(); ++ui)
    r.add_term(gb[ui], F.middleCols(static_cast<Eigen::Index>(ui) * nu, nu));
  cert.r = r.pruned();

  for (std::size_t k = 0; k < L.blocks.size(); ++k) {
    const int mu_k = L.blocks[k].size;
    CMat Fk = sdp::psd_factor(sol.primal[k + 1], rank_tol);
    const int rank_k = static_cast<int>(Fk.rows());
    NCPoly qk(mp.p.g(), mu_k * rank_k, nu);
    for (std::size_t ui = 0; ui < lb.size(); ++ui) {
      CMat Q(mu_k * rank_k, nu);
      for (int a = 0; a < mu_k; ++a)
        Q.middleRows(a * rank_k, rank_k) =
            Fk.middleCols((static_cast<Eigen::Index>(ui) * mu_k + a) * nu, nu);
      qk.add_term(lb[ui], Q);
    }
    cert.q_blocks.push_back(qk.pruned());
    cert.q_ranks.push_back(rank_k);
  }

  cert.residual = (mp.p - certificate_polynomial(L, cert)).max_coeff_norm();
  return cert;
}

NCPoly certificate_polynomial(const LinearPencil& L, const Certificate& cert) {
  NCPoly total = cert.r.adjoint() * cert.r;
  for (std::size_t k = 0; k < cert.q_blocks.size(); ++k) {
    const auto& qk = cert.q_blocks[k];
    const int rank_k = cert.q_ranks[k];
    if (rank_k == 0) continue;
    CMat I_rank = CMat::Identity(rank_k, rank_k);
    for (int j = 0; j <= L.g; ++j) {
      CMat Akj = L.block_coeff(static_cast<int>(k), j);
      if (Akj.isZero(0.0)) continue;
      NCPoly mid = qk.left_mul(kron(Akj, I_rank));
      if (j > 0) mid = mid.shift_letter(j);
      total = total + qk.adjoint() * mid;
    }
  }
  return total.pruned(1e-18);
}

std::pair<double, double> verify_certificate(const NCPoly& p, const LinearPencil& L, const Certificate& cert,
                                             int n_samples, std::uint64_t seed) {
  double coeff_residual = (p - certificate_polynomial(L, cert)).max_coeff_norm();
  double margin = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  for (int i = 0; i < n_samples; ++i) {
    int l = 1 + static_cast<int>(rng.uniform_below(3));
    auto X = sample_point(L, l, rng.next_u64());
    if (!X) continue;
    margin = std::min(margin, min_eigenvalue(p.evaluate(*X)));
  }
  return {coeff_residual, margin};
}

MomentData dual_to_moments(const AssembledSdp& assembled, const Eigen::VectorXd& y) {
  if (y.size() != static_cast<Eigen::Index>(assembled.keys.size()))
    throw std::invalid_argument("dual_to_moments: dual vector length mismatch");
  const int nu = assembled.nu;
  MomentData md;
  md.nu = nu;
  md.words = assembled.cons_words;
  md.S.assign(md.words.size(), CMat::Zero(nu, nu));

  // Collate the canonical-word dual scalars into complex entries z_{s,t}.
  std::vector<CMat> Z(md.words.size(), CMat::Zero(nu, nu));
  std::vector<bool> seen(md.words.size(), false);
  for (std::size_t i = 0; i < assembled.keys.size(); ++i) {
    const auto& k = assembled.keys[i];
    Z[k.word](k.s, k.t) += (k.imag_part ? Complex(0, 1) : Complex(1, 0)) * y(static_cast<Eigen::Index>(i));
    seen[k.word] = true;
  }

  for (std::size_t wi = 0; wi < md.words.size(); ++wi) {
    if (!seen[wi]) continue;
    const Word& w = md.words[wi];
    Word wstar = word_reverse(w);
    bool self_adjoint = (wstar == w);
    CMat Sw(nu, nu);
    if (self_adjoint) {
      // Diagonal held directly; strict upper entries z_{s,t} give S[t,s] = conj(z)/2.
      Sw.setZero();
      for (int s = 0; s < nu; ++s) {
        Sw(s, s) = Z[wi](s, s).real();
        for (int t = s + 1; t < nu; ++t) {
          Sw(t, s) = 0.5 * std::conj(Z[wi](s, t));
          Sw(s, t) = 0.5 * Z[wi](s, t);
        }
      }
      md.S[wi] = -Sw;  // sign-normalize: dual feasibility makes -S the psd side
    } else {
      Sw = 0.5 * Z[wi].adjoint();
      md.S[wi] = -Sw;
      md.S[md.words.index(wstar)] = -Sw.adjoint();
    }
  }
  return md;
}

Complex moment_pairing_complex(const MomentData& moments, const NCPoly& p) {
  Complex acc = 0;
  for (const auto& [w, Pw] : p.terms()) {
    if (!moments.words.contains(w)) continue;
    acc += (moments.S[moments.words.index(w)] * Pw).trace();
  }
  return acc;
}

double moment_pairing(const MomentData& moments, const NCPoly& p) {
  return moment_pairing_complex(moments, p).real();
}

MomentWitness gns_witness(const MembershipProblem& mp, const MomentData& moments, double tol,
                          double tol_witness, double rank_tol) {
  const int nu = moments.nu;
  const int g = mp.p.g();
  WordBasis basis_d1(g, mp.d + 1);
  WordBasis basis_d(g, mp.d);
  const auto N1 = static_cast<Eigen::Index>(basis_d1.size());
  const auto N0 = static_cast<Eigen::Index>(basis_d.size());

  auto S_of = [&](const Word& w) -> CMat {
    if (!moments.words.contains(w))
      throw std::invalid_argument("gns_witness: moment data does not cover word " + word_to_string(w));
    return moments.S[moments.words.index(w)];
  };

  // The column-Gram realization of the kernel <Phi(w)xi, Phi(v)eta> =
  // <xi, S_{v*w} eta> places S_{v*w}[n, m] at row (v, m), column (w, n):
  // entrywise block transposes relative to the abstract [S_{u*v}] layout.
  MomentWitness wit;
  wit.S_big = CMat::Zero(N1 * nu, N1 * nu);
  for (Eigen::Index vi = 0; vi < N1; ++vi)
    for (Eigen::Index wi = 0; wi < N1; ++wi)
      wit.S_big.block(vi * nu, wi * nu, nu, nu) =
          S_of(word_star_concat(basis_d1[vi], basis_d1[wi])).transpose();
  wit.S_big = 0.5 * (wit.S_big + wit.S_big.adjoint().eval());

  double smin = min_eigenvalue(wit.S_big);
  if (smin < -tol)
    throw std::invalid_argument("gns_witness: moment matrix is not psd within tolerance (lambda_min " +
                                std::to_string(smin) + ")");
  double phi_p = moment_pairing(moments, mp.p);
  if (phi_p >= 0)
    throw std::invalid_argument("gns_witness: <S, p> is not negative (" + std::to_string(phi_p) + ")");

  // Columns phi_{w,e} of F realize the kernel <Phi(w)xi, Phi(v)eta> = <xi, S_{v*w} eta>.
  CMat F = sdp::psd_factor(wit.S_big, rank_tol);
  CMat Phi_d = F.leftCols(N0 * nu);  // basis_d is a prefix of basis_d1

  // Rank-revealing orthonormalization of the degree-d columns.
  CMat G = Phi_d.adjoint() * Phi_d;
  G = 0.5 * (G + G.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<CMat> es(G);
  double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > rank_tol * lmax) keep.push_back(i);
  const auto r = static_cast<Eigen::Index>(keep.size());
  if (r == 0) throw std::invalid_argument("gns_witness: moment matrix has numerical rank zero");
  CMat B(N0 * nu, r);  // whitening map: columns of Phi_d*B are orthonormal
  for (Eigen::Index i = 0; i < r; ++i)
    B.col(i) = es.eigenvectors().col(keep[static_cast<std::size_t>(i)]) / std::sqrt(es.eigenvalues()(keep[static_cast<std::size_t>(i)]));

  // Left multiplication by x_j compressed to the span: Y_j = sym(B^H H_j B).
  wit.Y.clear();
  for (int j = 1; j <= g; ++j) {
    CMat H(N0 * nu, N0 * nu);
    for (Eigen::Index vi = 0; vi < N0; ++vi)
      for (Eigen::Index wi = 0; wi < N0; ++wi) {
        Word mid = basis_d[wi];
        mid.insert(mid.begin(), j);
        H.block(vi * nu, wi * nu, nu, nu) = S_of(word_star_concat(basis_d[vi], mid)).transpose();
      }
    CMat Yj = B.adjoint() * H * B;
    wit.Y.push_back(0.5 * (Yj + Yj.adjoint().eval()));
  }

  // gamma = sum_n e_n (x) P_E phi_{empty,n}; coordinates of P_E phi are B^H G columns.
  CMat coords = B.adjoint() * G;  // r x (N0 nu)
  wit.gamma = Eigen::VectorXcd::Zero(nu * r);
  for (int n = 0; n < nu; ++n) wit.gamma.segment(static_cast<Eigen::Index>(n) * r, r) = coords.col(n);

  CMat pY = mp.p.evaluate(wit.Y);
  wit.value = (wit.gamma.adjoint() * pY * wit.gamma)(0, 0).real();
  wit.pencil_min_eig = min_eigenvalue(mp.L.evaluate(wit.Y));
  wit.accurate = (wit.value < 0) && (wit.pencil_min_eig >= -tol_witness);
  return wit;
}

BoundResult bound_variable(const LinearPencil& L, int j, double cap, double bisect_tol) {
  if (!L.is_monic(1e-12)) throw std::invalid_argument("bound_variable: pencil must be monic");
  if (j < 1 || j > L.g) throw std::invalid_argument("bound_variable: variable index out of range");

  sdp::SdpOptions sopt;
  sopt.tol_gap = 1e-7;
  // c +- x_j is in the cone iff 1 +- x_j / c is; the normalized form keeps the
  // solves well scaled across the whole bisection range.
  auto feasible = [&](double c, bool extract, std::optional<Certificate>& plus,
                      std::optional<Certificate>& minus) {
    for (int sign : {-1, +1}) {
      NCPoly p(L.g, 1, 1);
      p.add_term(Word{}, CMat::Identity(1, 1));
      p.add_term(Word{j}, CMat::Constant(1, 1, Complex(sign / c, 0)));
      auto assembled = assemble_membership_sdp_ex(p, L, 0, 0, /*with_shift=*/true);
      auto sol = sdp::solve(assembled.problem, sopt);
      if (sol.status != sdp::SdpStatus::Optimal) return false;
      if (sol.primal_obj > 1e-7) return false;
      if (extract) {
        MembershipProblem mp{p, L, 0};
        auto cert = extract_certificate(mp, assembled, sol);
        cert.r = cert.r * Complex(std::sqrt(c), 0);
        for (auto& q : cert.q_blocks) q = q * Complex(std::sqrt(c), 0);
        NCPoly target(L.g, 1, 1);
        target.add_term(Word{}, CMat::Constant(1, 1, Complex(c, 0)));
        target.add_term(Word{j}, CMat::Constant(1, 1, Complex(sign, 0)));
        cert.residual = (target - certificate_polynomial(L, cert)).max_coeff_norm();
        (sign > 0 ? plus : minus) = cert;
      }
    }
    return true;
  };

  BoundResult out;
  std::optional<Certificate> cp, cm;
  if (!feasible(cap, false, cp, cm)) {
    out.bounded = false;
    out.c = cap;
    return out;
  }
  double lo = 0, hi = cap;
  while (hi - lo > bisect_tol) {
    double mid = 0.5 * (lo + hi);
    if (feasible(mid, false, cp, cm))
      hi = mid;
    else
      lo = mid;
  }
  // Extract strictly inside the feasible range; exactly at the boundary the
  // membership SDP is only weakly feasible and the Grams come out noisy.
  double c_out = std::min(hi + bisect_tol, cap);
  if (!feasible(c_out, true, cp, cm) || !cp || !cm) {
    out.bounded = false;
    out.c = cap;
    return out;
  }
  out.bounded = true;
  out.c = c_out;
  out.cert_plus = cp;
  out.cert_minus = cm;
  return out;
}

namespace {

// A stalled solve is still usable for classification when its cleaned iterate
// is near-feasible with a small gap; every accepting branch downstream is
// gated by an independent verification (symbolic residual or a concrete
// witness evaluation), so this only affects completeness, never soundness.
bool solve_usable(const sdp::SdpSolution& sol) {
  if (sol.status == sdp::SdpStatus::Optimal) return true;
  if (sol.status != sdp::SdpStatus::Inaccurate && sol.status != sdp::SdpStatus::IterationLimit) return false;
  return sol.primal_residual <= 1e-6 && sol.dual_residual <= 1e-5 && sol.gap <= 1e-5;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Positive: return "Positive";
    case Verdict::NotPositive: return "NotPositive";
    case Verdict::Inaccurate: return "Inaccurate";
  }
  return "?";
}

Decision decide_membership(const NCPoly& p, const LinearPencil& L, const DecideOptions& opts) {
  MembershipProblem mp = make_membership(p, L, opts.degree_override);
  Decision dec;
  dec.degree = mp.d;

  // Normalize the coefficient scale; factors pick up sqrt(scale) on the way out.
  const double scale = std::max(1.0, p.max_coeff_norm());
  MembershipProblem mps{p * Complex(1.0 / scale, 0), L, mp.d};

  auto assembled = assemble_membership_sdp_ex(mps.p, mps.L, mps.d, mps.d, /*with_shift=*/true);
  auto sol = sdp::solve(assembled.problem, opts.sdp);
  dec.solver_status = sol.status;

  if (sol.status == sdp::SdpStatus::Infeasible) {
    dec.verdict = Verdict::Inaccurate;
    dec.detail =
        "shifted membership SDP infeasible: no t with p + t*1 in the cone; the spectrahedron is "
        "unbounded in a direction where p decays (use augment_bounded for a witness)";
    return dec;
  }
  if (!solve_usable(sol)) {
    dec.verdict = Verdict::Inaccurate;
    dec.detail = "membership solve " + sdp::to_string(sol.status) + ": " + sol.detail;
    return dec;
  }
  dec.shift_opt = scale * sol.primal_obj;

  if (sol.primal_obj <= opts.shift_positive) {
    try {
      Certificate cert;
      try {
        cert = extract_certificate(mps, assembled, sol, opts.rank_tol);
      } catch (const std::invalid_argument&) {
        // Solver-noise dips beyond the factorization guard: retry with a
        // coarser cutoff; the clamped mass lands in the verified residual.
        cert = extract_certificate(mps, assembled, sol, 100 * opts.rank_tol);
      }
      cert.r = cert.r * Complex(std::sqrt(scale), 0);
      for (auto& q : cert.q_blocks) q = q * Complex(std::sqrt(scale), 0);
      auto [res, margin] = verify_certificate(mp.p, mp.L, cert, opts.n_samples, opts.seed);
      cert.residual = res;
      dec.eval_margin = margin;
      if (res <= opts.tol_cert) {
        dec.verdict = Verdict::Positive;
        dec.certificate = std::move(cert);
      } else {
        dec.verdict = Verdict::Inaccurate;
        dec.certificate = std::move(cert);
        dec.detail = "certificate residual " + std::to_string(res) + " exceeds tolerance";
      }
    } catch (const std::exception& e) {
      dec.verdict = Verdict::Inaccurate;
      dec.detail = std::string("certificate extraction failed: ") + e.what();
    }
    return dec;
  }

  // Classification of the negative side requires the shift optimum to clear
  // the threshold by more than the achieved gap.
  if (sol.primal_obj < opts.shift_negative || sol.gap > 0.5 * sol.primal_obj) {
    dec.verdict = Verdict::Inaccurate;
    dec.detail = "shift optimum " + std::to_string(dec.shift_opt) + " lies in the ambiguous band";
    return dec;
  }

  // Negative side: re-solve with the SOS Gram at degree d+1 so the dual moment
  // matrix covers WordBasis(d+1) (the separation cone of the GNS route).
  auto sep = assemble_membership_sdp_ex(mps.p, mps.L, mps.d, mps.d + 1, /*with_shift=*/true);
  auto sol2 = sdp::solve(sep.problem, opts.sdp);
  if (!solve_usable(sol2)) {
    dec.verdict = Verdict::Inaccurate;
    dec.detail = "separation solve " + sdp::to_string(sol2.status) + ": " + sol2.detail;
    return dec;
  }
  try {
    MomentData md = dual_to_moments(sep, sol2.dual);
    // Weak directions of the moment Gram amplify dual noise under the
    // whitening compression; coarsen the cutoff until the witness verifies.
    std::vector<double> ladder{opts.rank_tol};
    for (double c : {1e-5, 1e-4})
      if (c > opts.rank_tol) ladder.push_back(c);
    MomentWitness wit;
    for (double cut : ladder) {
      wit = gns_witness(mp, md, opts.tol_witness, opts.tol_witness, cut);
      if (wit.accurate) break;
    }
    dec.moments = std::move(md);
    if (wit.accurate) {
      dec.verdict = Verdict::NotPositive;
    } else {
      dec.verdict = Verdict::Inaccurate;
      dec.detail = "witness inaccurate (value " + std::to_string(wit.value) + ", pencil margin " +
                   std::to_string(wit.pencil_min_eig) + ")";
    }
    dec.witness = std::move(wit);
  } catch (const std::exception& e) {
    dec.verdict = Verdict::Inaccurate;
    dec.detail = std::string("witness extraction failed: ") + e.what();
  }
  return dec;
}

}  // namespace ncsos::certify
