#include <doctest.h>

#include "ncsos/ncpoly.hpp"
#include "ncsos/rng.hpp"

using namespace ncsos;

namespace {
CMat c1(Complex z) { return CMat::Constant(1, 1, z); }
}  // namespace

TEST_CASE("multiplication is word concatenation") {
  NCPoly x1 = NCPoly::letter(2, 1), x2 = NCPoly::letter(2, 2);
  NCPoly prod = x1 * x2;
  CHECK(prod.terms().size() == 1);
  CHECK(prod.coefficient(Word{1, 2})(0, 0) == Complex(1, 0));

  NCPoly one = NCPoly::identity(2, 1);
  NCPoly telescoped = (one + x1) * (one - x1);
  CHECK(telescoped.coefficient(Word{})(0, 0) == Complex(1, 0));
  CHECK(telescoped.coefficient(Word{1}).isZero(0.0));
  CHECK(telescoped.coefficient(Word{1, 1})(0, 0) == Complex(-1, 0));

  NCPoly zero = NCPoly::zero(2, 1);
  CHECK((x1 * zero).is_zero());
  CHECK(!zero.degree().has_value());
}

TEST_CASE("adjoint reverses words and conjugates coefficients") {
  Rng rng(7);
  CMat A = rng.complex_gaussian(2, 2);
  NCPoly p(2, 2, 2);
  p.add_term(Word{1, 2}, A);
  NCPoly pa = p.adjoint();
  CHECK((pa.coefficient(Word{2, 1}) - A.adjoint()).norm() == 0.0);

  NCPoly herm = rng.nc_poly_hermitian(2, 2, 2);
  CHECK(herm.is_hermitian(1e-14));
  CHECK((herm.adjoint() - herm).max_coeff_norm() == 0.0);

  NCPoly im(1, 1, 1);
  im.add_term(Word{}, c1(Complex(0, 1)));
  CHECK(im.adjoint().coefficient(Word{})(0, 0) == Complex(0, -1));
}

TEST_CASE("adjoint is an algebra anti-homomorphism") {
  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    NCPoly p = rng.nc_poly(2, 2, 2, 2);
    NCPoly q = rng.nc_poly(2, 2, 2, 2);
    CHECK(((p * q).adjoint() - q.adjoint() * p.adjoint()).max_coeff_norm() <= 1e-12);
    CHECK((p.adjoint().adjoint() - p).max_coeff_norm() == 0.0);
  }
}

TEST_CASE("evaluation matches direct matrix arithmetic") {
  NCPoly one = NCPoly::identity(2, 3);
  std::vector<CMat> X{CMat::Zero(2, 2), CMat::Zero(2, 2)};
  CHECK((one.evaluate(X) - CMat::Identity(6, 6)).norm() == 0.0);

  NCPoly p = NCPoly::letter(2, 1) * NCPoly::letter(2, 2);
  CMat X1(2, 2), X2(2, 2);
  X1 << 0, 1, 1, 0;
  X2 << 1, 0, 0, -1;
  CMat expect(2, 2);
  expect << 0, -1, 1, 0;
  CHECK((p.evaluate({X1, X2}) - expect).norm() <= 1e-15);
}

TEST_CASE("hermitian polynomials evaluate hermitely on hermitian tuples") {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    NCPoly p = rng.nc_poly_hermitian(2, 3, 2);
    auto X = rng.hermitian_tuple(2, 3);
    CMat val = p.evaluate(X);
    CHECK((val - val.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("evaluation is multiplicative") {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    NCPoly p = rng.nc_poly(2, 3, 2, 2, 0.5);
    NCPoly q = rng.nc_poly(2, 3, 2, 2, 0.5);
    auto X = rng.hermitian_tuple(2, 2, 0.4);
    CMat lhs = (p * q).evaluate(X);
    CMat rhs = p.evaluate(X) * q.evaluate(X);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("gram_to_poly expands the Veronese quadratic form") {
  WordBasis basis(1, 1);
  NCPoly p = gram_to_poly(CMat::Identity(2, 2), basis, 1);
  CHECK(p.coefficient(Word{})(0, 0) == Complex(1, 0));
  CHECK(p.coefficient(Word{1, 1})(0, 0) == Complex(1, 0));
  CHECK(p.terms().size() == 2);

  CHECK(gram_to_poly(CMat::Zero(2, 2), basis, 1).is_zero());
}

TEST_CASE("gram_to_poly of F*F matches the square of the row polynomial") {
  Rng rng(9);
  WordBasis basis(2, 2);
  const int nu = 2;
  for (int rep = 0; rep < 5; ++rep) {
    CMat F = rng.complex_gaussian(3, static_cast<int>(basis.size()) * nu);
    NCPoly r(2, 3, nu);
    for (std::size_t wi = 0; wi < basis.size(); ++wi)
      r.add_term(basis[wi], F.middleCols(static_cast<Eigen::Index>(wi) * nu, nu));
    NCPoly direct = r.adjoint() * r;
    NCPoly viaGram = gram_to_poly(F.adjoint() * F, basis, nu);
    CHECK((direct - viaGram).max_coeff_norm() <= 1e-12);
  }
}

TEST_CASE("prune drops small terms only on request") {
  NCPoly p(1, 1, 1);
  p.add_term(Word{1}, c1(Complex(1e-20, 0)));
  CHECK(!p.is_zero());
  CHECK(p.pruned().is_zero());
}
