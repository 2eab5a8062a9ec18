#include "ncsos/groupfree.hpp"

#include "ncsos/pencil.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace ncsos::groupfree {

FreeProductSignature::FreeProductSignature(std::vector<int> n) : factors(std::move(n)) {
  if (factors.empty()) throw std::invalid_argument("signature: at least one factor required");
  for (int ni : factors)
    if (ni < 2) throw std::invalid_argument("signature: every cyclic order must be >= 2");
}

Complex FreeProductSignature::root(int i) const { return root_power(i, 1); }

Complex FreeProductSignature::root_power(int i, long m) const {
  const long n = order(i);
  long r = ((m % n) + n) % n;
  double theta = 2.0 * M_PI * static_cast<double>(r) / static_cast<double>(n);
  return Complex(std::cos(theta), std::sin(theta));
}

int FreeProductSignature::povm_variables() const {
  int g = 0;
  for (int ni : factors) g += ni - 1;
  return g;
}

int FreeProductSignature::variable_index(int i, int j) const {
  if (i < 1 || i > num_factors()) throw std::invalid_argument("variable_index: factor out of range");
  if (j < 1 || j >= order(i)) throw std::invalid_argument("variable_index: exponent out of range");
  int idx = 0;
  for (int k = 1; k < i; ++k) idx += order(k) - 1;
  return idx + j;
}

int GroupWord::total_degree() const {
  int t = 0;
  for (const auto& [i, r] : syllables) t += r;
  return t;
}

std::string group_word_to_string(const GroupWord& w) {
  if (w.syllables.empty()) return "e";
  std::string s;
  for (std::size_t k = 0; k < w.syllables.size(); ++k) {
    if (k) s += ".";
    s += "x" + std::to_string(w.syllables[k].first);
    if (w.syllables[k].second != 1) s += "^" + std::to_string(w.syllables[k].second);
  }
  return s;
}

GroupWord reduce_concat(const FreeProductSignature& sig, const GroupWord& a, const GroupWord& b) {
  GroupWord out = a;
  for (const auto& syl : b.syllables) {
    if (!out.syllables.empty() && out.syllables.back().first == syl.first) {
      int n = sig.order(syl.first);
      int r = (out.syllables.back().second + syl.second) % n;
      out.syllables.pop_back();
      if (r != 0) out.syllables.emplace_back(syl.first, r);
      // a cancellation may expose a new adjacent same-factor pair only if r == 0,
      // and the loop invariant (out reduced) keeps handling it
    } else {
      out.syllables.push_back(syl);
    }
  }
  return out;
}

GroupWord group_word_adjoint(const FreeProductSignature& sig, const GroupWord& w) {
  GroupWord out;
  for (auto it = w.syllables.rbegin(); it != w.syllables.rend(); ++it)
    out.syllables.emplace_back(it->first, sig.order(it->first) - it->second);
  return out;
}

GroupPoly::GroupPoly(FreeProductSignature sig, int rows, int cols)
    : sig_(std::move(sig)), rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("GroupPoly: bad dimensions");
}

GroupPoly GroupPoly::identity(const FreeProductSignature& sig, int dim) {
  GroupPoly p(sig, dim, dim);
  p.add_term(GroupWord{}, CMat::Identity(dim, dim));
  return p;
}

GroupPoly GroupPoly::generator_power(const FreeProductSignature& sig, int factor, int exponent, int dim) {
  int n = sig.order(factor);
  int r = ((exponent % n) + n) % n;
  GroupPoly p(sig, dim, dim);
  GroupWord w;
  if (r != 0) w.syllables.emplace_back(factor, r);
  p.add_term(w, CMat::Identity(dim, dim));
  return p;
}

int GroupPoly::coeff_dim() const {
  if (rows_ != cols_) throw std::logic_error("coeff_dim of a rectangular group polynomial");
  return rows_;
}

int GroupPoly::extent() const {
  int e = 0;
  for (const auto& [w, c] : terms_) e = std::max(e, w.extent());
  return e;
}

int GroupPoly::total_degree() const {
  int t = 0;
  for (const auto& [w, c] : terms_) t = std::max(t, w.total_degree());
  return t;
}

void GroupPoly::add_term(const GroupWord& w, const CMat& c) {
  for (std::size_t k = 0; k < w.syllables.size(); ++k) {
    auto [i, r] = w.syllables[k];
    if (i < 1 || i > sig_.num_factors() || r < 1 || r >= sig_.order(i))
      throw std::invalid_argument("GroupPoly: unreduced or out-of-range syllable");
    if (k + 1 < w.syllables.size() && w.syllables[k + 1].first == i)
      throw std::invalid_argument("GroupPoly: adjacent syllables from the same factor");
  }
  if (c.rows() != rows_ || c.cols() != cols_) throw std::invalid_argument("GroupPoly: coefficient shape mismatch");
  auto it = terms_.find(w);
  if (it == terms_.end()) {
    if (!c.isZero(0.0)) terms_.emplace(w, c);
  } else {
    it->second += c;
    if (it->second.isZero(0.0)) terms_.erase(it);
  }
}

CMat GroupPoly::coefficient(const GroupWord& w) const {
  auto it = terms_.find(w);
  if (it == terms_.end()) return CMat::Zero(rows_, cols_);
  return it->second;
}

GroupPoly GroupPoly::pruned(double eps) const {
  GroupPoly out(sig_, rows_, cols_);
  for (const auto& [w, c] : terms_)
    if (c.cwiseAbs().maxCoeff() > eps) out.terms_.emplace(w, c);
  return out;
}

double GroupPoly::max_coeff_norm() const {
  double m = 0;
  for (const auto& [w, c] : terms_) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

bool GroupPoly::is_hermitian(double tol) const {
  if (rows_ != cols_) return false;
  for (const auto& [w, c] : terms_) {
    CMat other = coefficient(group_word_adjoint(sig_, w));
    if ((other - c.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

GroupPoly GroupPoly::operator+(const GroupPoly& q) const {
  if (!(sig_ == q.sig_) || rows_ != q.rows_ || cols_ != q.cols_)
    throw std::invalid_argument("GroupPoly: shape/signature mismatch");
  GroupPoly out = *this;
  for (const auto& [w, c] : q.terms_) out.add_term(w, c);
  return out;
}

GroupPoly GroupPoly::operator-(const GroupPoly& q) const { return *this + q * Complex(-1, 0); }

GroupPoly GroupPoly::operator*(Complex s) const {
  GroupPoly out(sig_, rows_, cols_);
  if (s == Complex(0, 0)) return out;
  for (const auto& [w, c] : terms_) out.terms_.emplace(w, s * c);
  return out;
}

GroupPoly GroupPoly::operator*(const GroupPoly& q) const {
  if (!(sig_ == q.sig_)) throw std::invalid_argument("GroupPoly multiply: signature mismatch");
  if (cols_ != q.rows_) throw std::invalid_argument("GroupPoly multiply: coefficient dimension mismatch");
  GroupPoly out(sig_, rows_, q.cols_);
  for (const auto& [u, a] : terms_)
    for (const auto& [v, b] : q.terms_) out.add_term(reduce_concat(sig_, u, v), a * b);
  return out;
}

GroupPoly GroupPoly::adjoint() const {
  GroupPoly out(sig_, cols_, rows_);
  for (const auto& [w, c] : terms_) out.add_term(group_word_adjoint(sig_, w), c.adjoint());
  return out;
}

GroupPoly GroupPoly::left_mul(const CMat& a) const {
  if (a.cols() != rows_) throw std::invalid_argument("GroupPoly left_mul: shape mismatch");
  GroupPoly out(sig_, static_cast<int>(a.rows()), cols_);
  for (const auto& [w, c] : terms_) out.add_term(w, a * c);
  return out;
}

CMat GroupPoly::evaluate(const std::vector<CMat>& U) const {
  if (static_cast<int>(U.size()) != sig_.num_factors())
    throw std::invalid_argument("GroupPoly evaluate: tuple length mismatch");
  Eigen::Index l = U.empty() ? 1 : U[0].rows();
  for (const auto& Ui : U)
    if (Ui.rows() != l || Ui.cols() != l) throw std::invalid_argument("GroupPoly evaluate: size mismatch");

  // Cache U_i^r for 0 <= r < n_i.
  std::vector<std::vector<CMat>> powers;
  for (int i = 1; i <= sig_.num_factors(); ++i) {
    std::vector<CMat> pw{CMat::Identity(l, l)};
    for (int r = 1; r < sig_.order(i); ++r) pw.push_back(pw.back() * U[static_cast<std::size_t>(i - 1)]);
    powers.push_back(std::move(pw));
  }

  CMat out = CMat::Zero(rows_ * l, cols_ * l);
  for (const auto& [w, c] : terms_) {
    CMat img = CMat::Identity(l, l);
    for (const auto& [i, r] : w.syllables) img = img * powers[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(r)];
    out += kron(c, img);
  }
  return out;
}

std::vector<GroupPoly> spectral_projections(int n) {
  if (n < 2) throw std::invalid_argument("spectral_projections: n must be >= 2");
  FreeProductSignature sig({n});
  std::vector<GroupPoly> out;
  for (int k = 1; k <= n; ++k) out.push_back(spectral_projection(sig, 1, k));
  return out;
}

GroupPoly spectral_projection(const FreeProductSignature& sig, int i, int k, int dim) {
  int n = sig.order(i);
  GroupPoly q(sig, dim, dim);
  for (int j = 0; j < n; ++j) {
    Complex coeff = sig.root_power(i, static_cast<long>(-j) * k) / static_cast<double>(n);
    GroupWord word;
    if (j != 0) word.syllables.emplace_back(i, j);
    q.add_term(word, coeff * CMat::Identity(dim, dim));
  }
  return q;
}

NCPoly omega_map(const GroupPoly& p) {
  const auto& sig = p.signature();
  const int g = sig.povm_variables();

  // Omega(x_i^r) = 1 + sum_k (w_i^{rk} - 1) y_{i,k}, a degree-one polynomial.
  auto syllable_image = [&](int i, int r) {
    NCPoly img = NCPoly::identity(g, 1);
    for (int k = 1; k < sig.order(i); ++k) {
      Complex c = sig.root_power(i, static_cast<long>(r) * k) - Complex(1, 0);
      img.add_term(Word{sig.variable_index(i, k)}, CMat::Constant(1, 1, c));
    }
    return img;
  };

  NCPoly out(g, p.rows(), p.cols());
  for (const auto& [word, coeff] : p.terms()) {
    NCPoly scalar = NCPoly::identity(g, 1);
    for (const auto& [i, r] : word.syllables) scalar = scalar * syllable_image(i, r);
    for (const auto& [u, s] : scalar.terms()) out.add_term(u, s(0, 0) * coeff);
  }
  return out.pruned(1e-15);
}

GroupPoly split_map(const NCPoly& f, const FreeProductSignature& sig) {
  const int g = sig.povm_variables();
  if (f.g() != g) throw std::invalid_argument("split_map: variable count does not match the signature");

  // y flat index -> (factor, exponent)
  std::vector<std::pair<int, int>> var_of;
  var_of.emplace_back(0, 0);
  for (int i = 1; i <= sig.num_factors(); ++i)
    for (int j = 1; j < sig.order(i); ++j) var_of.emplace_back(i, j);

  GroupPoly out(sig, f.rows(), f.cols());
  for (const auto& [word, coeff] : f.terms()) {
    GroupPoly img = GroupPoly::identity(sig, 1);
    for (int letter : word) {
      auto [i, j] = var_of[static_cast<std::size_t>(letter)];
      img = img * spectral_projection(sig, i, j);
    }
    for (const auto& [w, s] : img.terms()) out.add_term(w, s(0, 0) * coeff);
  }
  return out.pruned(1e-15);
}

UnitaryTuple sample_unitary_tuple(const FreeProductSignature& sig, int l, std::uint64_t seed) {
  Rng rng(seed);
  UnitaryTuple out;
  out.sig = sig;
  for (int i = 1; i <= sig.num_factors(); ++i) {
    CMat Q = rng.unitary(l);
    Eigen::VectorXcd eigs(l);
    for (int t = 0; t < l; ++t) {
      auto k = rng.uniform_below(static_cast<std::uint64_t>(sig.order(i)));
      eigs(t) = sig.root_power(i, static_cast<long>(k));
    }
    out.U.push_back(Q * eigs.asDiagonal() * Q.adjoint());
  }
  return out;
}

double unitary_tuple_defect(const UnitaryTuple& U) {
  double defect = 0;
  for (int i = 1; i <= U.sig.num_factors(); ++i) {
    CMat P = CMat::Identity(U.U[static_cast<std::size_t>(i - 1)].rows(), U.U[static_cast<std::size_t>(i - 1)].cols());
    for (int r = 0; r < U.sig.order(i); ++r) P = P * U.U[static_cast<std::size_t>(i - 1)];
    defect = std::max(defect, (P - CMat::Identity(P.rows(), P.cols())).cwiseAbs().maxCoeff());
  }
  return defect;
}

double PovmTuple::validity_margin() const {
  double margin = std::numeric_limits<double>::infinity();
  int idx = 0;
  for (int i = 1; i <= sig.num_factors(); ++i) {
    CMat sum = CMat::Zero(E[0].rows(), E[0].cols());
    for (int j = 1; j < sig.order(i); ++j) {
      margin = std::min(margin, min_eigenvalue(0.5 * (E[static_cast<std::size_t>(idx)] +
                                                      E[static_cast<std::size_t>(idx)].adjoint())));
      sum += E[static_cast<std::size_t>(idx)];
      ++idx;
    }
    margin = std::min(margin, min_eigenvalue(CMat::Identity(sum.rows(), sum.cols()) - 0.5 * (sum + sum.adjoint())));
  }
  return margin;
}

namespace {

// Hermitian square root with eigenvalue clamping at zero.
CMat psd_sqrt(const CMat& a, double clamp_tol) {
  CMat h = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(h);
  if (es.eigenvalues().minCoeff() < -clamp_tol)
    throw std::invalid_argument("naimark_dilate: POVM element is significantly indefinite");
  Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().adjoint();
}

bool projective_within(const std::vector<CMat>& elems, double tol) {
  for (const auto& P : elems)
    if ((P * P - P).cwiseAbs().maxCoeff() > tol) return false;
  for (std::size_t a = 0; a < elems.size(); ++a)
    for (std::size_t b = a + 1; b < elems.size(); ++b)
      if ((elems[a] * elems[b]).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

}  // namespace

NaimarkDilation naimark_dilate(const PovmTuple& povm) {
  const auto& sig = povm.sig;
  if (povm.validity_margin() < -1e-8)
    throw std::invalid_argument("naimark_dilate: POVM conditions violated beyond clamp margin");
  const auto l = povm.E[0].rows();

  // State: projections per already-processed factor on the current space, and
  // the accumulated isometry from the original space.
  std::vector<std::vector<CMat>> proj;  // proj[i][k], k = 0..n_i-1 for exponents 1..n_i
  CMat V = CMat::Identity(l, l);

  int idx = 0;
  for (int i = 1; i <= sig.num_factors(); ++i) {
    const int n = sig.order(i);
    // POVM elements of factor i compressed forward onto the current space:
    // E'_{i,j} = V E_{i,j} V*, complement element picks up I - V V*.
    std::vector<CMat> cur;
    CMat sum = CMat::Zero(V.rows(), V.rows());
    for (int j = 1; j < n; ++j) {
      CMat Ej = V * (0.5 * (povm.E[static_cast<std::size_t>(idx)] +
                            povm.E[static_cast<std::size_t>(idx)].adjoint())) * V.adjoint();
      cur.push_back(Ej);
      sum += Ej;
      ++idx;
    }
    cur.push_back(CMat::Identity(V.rows(), V.rows()) - sum);  // exponent-0 element

    if (projective_within(cur, 1e-10)) {
      proj.push_back(cur);
      continue;  // identity embedding, no enlargement
    }

    // Block-isometry Naimark step: W = col(E_1^{1/2}, ..., E_n^{1/2}) is an
    // isometry into C^n (x) current, and P_k = e_k e_k* (x) I dilates the POVM.
    const auto cl = V.rows();
    CMat W(n * cl, cl);
    for (int k = 0; k < n; ++k) W.middleRows(static_cast<Eigen::Index>(k) * cl, cl) = psd_sqrt(cur[static_cast<std::size_t>(k)], 1e-7);
    // Previously dilated factors extend by conjugation, with the new mass on
    // their exponent-0 (eigenvalue 1) projection.
    for (auto& pf : proj) {
      std::vector<CMat> extended;
      CMat WWstar = W * W.adjoint();
      for (std::size_t k = 0; k + 1 < pf.size(); ++k) extended.push_back(W * pf[k] * W.adjoint());
      CMat last = W * pf.back() * W.adjoint() + (CMat::Identity(n * cl, n * cl) - WWstar);
      extended.push_back(last);
      pf = std::move(extended);
    }
    std::vector<CMat> mine;
    for (int k = 0; k < n; ++k) {
      CMat Pk = CMat::Zero(n * cl, n * cl);
      Pk.block(static_cast<Eigen::Index>(k) * cl, static_cast<Eigen::Index>(k) * cl, cl, cl) =
          CMat::Identity(cl, cl);
      mine.push_back(Pk);
    }
    proj.push_back(std::move(mine));
    V = W * V;
  }

  NaimarkDilation out;
  out.U.sig = sig;
  const auto Lfin = V.rows();
  for (int i = 1; i <= sig.num_factors(); ++i) {
    const int n = sig.order(i);
    CMat U = CMat::Zero(Lfin, Lfin);
    const auto& pf = proj[static_cast<std::size_t>(i - 1)];
    // pf[k] is the projection for exponent k+1 (k = 0..n-2) and pf[n-1] for exponent 0.
    for (int k = 1; k <= n; ++k)
      U += sig.root_power(i, k) * pf[static_cast<std::size_t>(k - 1)];
    out.U.U.push_back(U);
  }
  out.V = V;
  return out;
}

}  // namespace ncsos::groupfree
