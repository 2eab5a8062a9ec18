#include <doctest.h>

#include "ncsos/fock.hpp"
#include "ncsos/pencil.hpp"
#include "ncsos/rng.hpp"

using namespace ncsos;

TEST_CASE("symmetrized creation operator for one variable") {
  auto f = build_fock_tuple(1, 2);
  Eigen::MatrixXd expect(3, 3);
  expect << 0, 1, 0, 1, 0, 1, 0, 1, 0;
  CHECK((f.A[0] - expect).norm() == 0.0);
}

TEST_CASE("truncation kills images beyond the cutoff") {
  auto f = build_fock_tuple(2, 1);
  // basis: (e, x1, x2)
  Eigen::VectorXd e0 = Eigen::VectorXd::Unit(3, 0);
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(3, 1);
  Eigen::VectorXd e2 = Eigen::VectorXd::Unit(3, 2);
  CHECK((f.A[0] * e0 - e1).norm() == 0.0);
  CHECK((f.A[0] * e1 - e0).norm() == 0.0);
  CHECK((f.A[0] * e2).norm() == 0.0);
}

TEST_CASE("creation matrices are symmetric and size-capped") {
  for (int g = 1; g <= 3; ++g)
    for (int d = 1; d <= 3; ++d) {
      auto f = build_fock_tuple(g, d);
      for (const auto& A : f.A) CHECK((A - A.transpose()).norm() == 0.0);
    }
  CHECK_THROWS(build_fock_tuple(3, 10));  // N(10) for g=3 exceeds the default cap
}

TEST_CASE("extraction matrix rows are the vectors A^w Omega") {
  auto f = build_fock_tuple(1, 2);
  auto ext = extraction_matrix(f);
  Eigen::MatrixXd expect(3, 3);
  expect << 1, 0, 0, 0, 1, 0, 1, 0, 1;
  CHECK((ext.M - expect).norm() == 0.0);

  auto f1 = build_fock_tuple(1, 1);
  CHECK((extraction_matrix(f1).M - Eigen::MatrixXd::Identity(2, 2)).norm() == 0.0);
}

TEST_CASE("extraction matrix is invertible across the desk range") {
  for (int g = 1; g <= 3; ++g)
    for (int d = 1; d <= (g == 3 ? 3 : 4); ++d) {
      auto ext = extraction_matrix(build_fock_tuple(g, d));
      CHECK(std::isfinite(ext.condition));
      CHECK((ext.M * ext.M_inv - Eigen::MatrixXd::Identity(ext.M.rows(), ext.M.cols())).cwiseAbs().maxCoeff() <=
            1e-10);
    }
}

TEST_CASE("coefficient extraction of simple images") {
  auto f = build_fock_tuple(2, 2);
  const auto N = static_cast<Eigen::Index>(f.basis.size());

  NCPoly one = extract_coefficients(CMat::Identity(N, N), f, 1);
  CHECK(one.terms().size() == 1);
  CHECK(one.coefficient(Word{})(0, 0) == Complex(1, 0));

  NCPoly x1 = extract_coefficients(f.A[0].cast<Complex>(), f, 1);
  CHECK(x1.terms().size() == 1);
  CHECK(x1.coefficient(Word{1})(0, 0) == Complex(1, 0));
}

TEST_CASE("extraction round-trip and coefficient bound") {
  Rng rng(17);
  for (int g = 1; g <= 3; ++g) {
    auto f = build_fock_tuple(g, 3);
    auto ext = extraction_matrix(f);
    for (int nu : {2, 3}) {
      for (int rep = 0; rep < 10; ++rep) {
        NCPoly q = rng.nc_poly(g, 3, nu, nu);
        CMat T = f.evaluate(q);
        NCPoly back = extract_coefficients(T, f, nu, ext);
        CHECK((q - back).max_coeff_norm() <= 1e-9);

        double qa_norm = T.operatorNorm();
        for (const auto& [w, c] : q.terms()) CHECK(c.operatorNorm() <= ext.lambda_bound * qa_norm + 1e-9);
      }
    }
  }
}

TEST_CASE("extraction rejects non-polynomial images") {
  auto f = build_fock_tuple(2, 2);
  const auto N = static_cast<Eigen::Index>(f.basis.size());
  Rng rng(4);
  CMat junk = rng.complex_gaussian(static_cast<int>(N), static_cast<int>(N));
  CHECK_THROWS(extract_coefficients(junk, f, 1));
}

TEST_CASE("pencil scaling on the Fock tuple") {
  auto f = build_fock_tuple(1, 2);

  LinearPencil L = LinearPencil::monic(1, 1, {CMat::Identity(1, 1)});
  CHECK(scale_for_pencil(L, f) == 0.25);

  LinearPencil trivial = LinearPencil::monic(1, 2, {CMat::Zero(2, 2)});
  CHECK(scale_for_pencil(trivial, f) == 1.0);

  Rng rng(21);
  for (int rep = 0; rep < 5; ++rep) {
    LinearPencil Lr = LinearPencil::monic(1, 2, {rng.hermitian(2)});
    double t = scale_for_pencil(Lr, f);
    std::vector<CMat> tA{t * f.A[0].cast<Complex>()};
    CHECK(min_eigenvalue(Lr.evaluate(tA)) >= 0.5);
  }
}
