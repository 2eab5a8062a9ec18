#include <doctest.h>

#include "ncsos/pencil.hpp"
#include "ncsos/rng.hpp"

using namespace ncsos;

namespace {
CMat c1(double v) { return CMat::Constant(1, 1, Complex(v, 0)); }
}  // namespace

TEST_CASE("pencil evaluation and membership") {
  auto L2 = build_povm_pencil({2});  // diag(2y, 2(1-y))
  CHECK(L2.g == 1);
  CHECK(L2.mu == 2);
  CHECK(L2.blocks.size() == 2);

  CHECK(membership(L2, {c1(0.5)}));
  CHECK(!membership(L2, {c1(2.0)}));

  auto monicL = LinearPencil::monic(1, 1, {c1(1)});
  CHECK(membership(monicL, {c1(0.0)}));
  CHECK_THROWS(membership(monicL, {CMat::Constant(1, 1, Complex(0, 1))}));
}

TEST_CASE("monicization of the doubled interval pencil") {
  auto L2 = build_povm_pencil({2});
  AffineChange ch{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Constant(1, 0.5)};
  auto Lhat = monicize(L2, ch);
  CHECK(Lhat.is_monic(0.0));
  CMat expect = CMat::Zero(2, 2);
  expect(0, 0) = 2;
  expect(1, 1) = -2;
  CHECK((Lhat.coeffs[1] - expect).cwiseAbs().maxCoeff() <= 1e-15);

  // Identity change keeps an already monic pencil.
  AffineChange id{Eigen::MatrixXd::Identity(1, 1), Eigen::VectorXd::Zero(1)};
  auto same = monicize(Lhat, id);
  CHECK((same.coeffs[1] - Lhat.coeffs[1]).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS(monicize(L2, id));  // constant term is not the identity at b = 0
}

TEST_CASE("povm pencil monicizes with the canonical change") {
  for (auto factors : std::vector<std::vector<int>>{{2}, {2, 3}, {3, 3}, {2, 2, 2}}) {
    auto L = build_povm_pencil(factors);
    auto ch = povm_monic_change(factors);
    auto Lhat = monicize(L, ch);
    CHECK(Lhat.is_monic(1e-12));
    // Composing with the inverse change recovers the pencil coefficient-wise.
    auto back = apply_change(Lhat, ch.inverse());
    for (int j = 0; j <= L.g; ++j)
      CHECK((back.coeffs[static_cast<std::size_t>(j)] - L.coeffs[static_cast<std::size_t>(j)])
                .cwiseAbs()
                .maxCoeff() <= 1e-12);
  }
}

TEST_CASE("povm pencil membership is exactly the componentwise povm condition") {
  std::vector<int> factors{2, 3};
  auto L = build_povm_pencil(factors);
  CHECK(L.g == 3);
  CHECK(membership(L, {c1(0.5), c1(1.0 / 3), c1(1.0 / 3)}));
  CHECK(!membership(L, {c1(-0.1), c1(1.0 / 3), c1(1.0 / 3)}));

  Rng rng(99);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    int l = 1 + static_cast<int>(rng.uniform_below(2));
    std::vector<CMat> E;
    for (int j = 0; j < L.g; ++j) {
      CMat h = rng.hermitian(l, 0.6);
      E.push_back(h * h.adjoint() * 0.4 + 0.1 * rng.hermitian(l));  // mixes members and violators
    }
    bool direct = true;
    int idx = 0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      CMat sum = CMat::Zero(l, l);
      for (int j = 1; j < factors[i]; ++j, ++idx) {
        direct = direct && min_eigenvalue(E[static_cast<std::size_t>(idx)]) >= -1e-9;
        sum += E[static_cast<std::size_t>(idx)];
      }
      direct = direct && min_eigenvalue(CMat::Identity(l, l) - sum) >= -1e-9;
    }
    CHECK(membership(L, E, 1e-9) == direct);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("bounding augmentation structure and membership") {
  Rng rng(31);
  auto L = LinearPencil::monic(1, 2, {rng.hermitian(2)});
  auto Ln = augment_bounded(L, 2);
  CHECK(Ln.mu == 4);
  CHECK(Ln.blocks.size() == 2);
  CMat S = Ln.coeffs[1].bottomRightCorner(2, 2);
  CHECK(S(0, 1) == Complex(0.5, 0));
  CHECK(S(1, 0) == Complex(0.5, 0));
  CHECK(S(0, 0) == Complex(0, 0));

  for (int rep = 0; rep < 20; ++rep) {
    auto X = sample_point(Ln, 2, 1000 + static_cast<std::uint64_t>(rep));
    REQUIRE(X.has_value());
    CHECK(membership(L, *X, 1e-8));               // D_{Lambda_n} subset D_L
    CHECK((*X)[0].operatorNorm() <= 2.0 + 1e-6);  // the S block bounds the variables
  }

  std::vector<CMat> big{Complex(3, 0) * CMat::Identity(2, 2)};
  CHECK(!membership(Ln, big));
  CHECK_THROWS(augment_bounded(build_povm_pencil({2}), 1));  // non-monic input
}

TEST_CASE("sample_point is reproducible and lands inside") {
  auto L = build_povm_pencil({2, 3});
  auto ch = povm_monic_change({2, 3});
  auto Lhat = monicize(L, ch);
  auto X1 = sample_point(Lhat, 2, 42);
  auto X2 = sample_point(Lhat, 2, 42);
  REQUIRE(X1.has_value());
  REQUIRE(X2.has_value());
  for (int j = 0; j < Lhat.g; ++j) CHECK(((*X1)[static_cast<std::size_t>(j)] - (*X2)[static_cast<std::size_t>(j)]).norm() == 0.0);
  CHECK(membership(Lhat, *X1, 1e-8));

  // Decode back to povm coordinates: E = X + b gives a genuine povm tuple.
  int idx = 0;
  std::vector<int> factors{2, 3};
  for (std::size_t i = 0; i < factors.size(); ++i) {
    CMat sum = CMat::Zero(2, 2);
    for (int j = 1; j < factors[i]; ++j, ++idx) {
      CMat Eij = (*X1)[static_cast<std::size_t>(idx)] + ch.b(idx) * CMat::Identity(2, 2);
      CHECK(min_eigenvalue(Eij) >= -1e-8);
      sum += Eij;
    }
    CHECK(min_eigenvalue(CMat::Identity(2, 2) - sum) >= -1e-8);
  }
}

TEST_CASE("pencil constructor validates block structure and hermiticity") {
  CMat offblock = CMat::Zero(2, 2);
  offblock(0, 1) = 1;
  offblock(1, 0) = 1;
  CHECK_THROWS(LinearPencil(1, {CMat::Identity(2, 2), offblock}, {{0, 1}, {1, 1}}));

  CMat nonherm = CMat::Zero(1, 1);
  nonherm(0, 0) = Complex(0, 1);
  CHECK_THROWS(LinearPencil(1, {CMat::Identity(1, 1), nonherm}));
}
