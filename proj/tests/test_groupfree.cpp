#include <doctest.h>

#include "ncsos/groupfree.hpp"
#include "ncsos/pencil.hpp"

using namespace ncsos;
using namespace ncsos::groupfree;

namespace {

GroupPoly random_group_poly(Rng& rng, const FreeProductSignature& sig, int max_extent, int dim) {
  GroupPoly p(sig, dim, dim);
  p.add_term(GroupWord{}, rng.complex_gaussian(dim, dim));
  int m = sig.num_factors();
  for (int rep = 0; rep < 6; ++rep) {
    GroupWord w;
    int ext = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(max_extent)));
    int prev = 0;
    for (int k = 0; k < ext; ++k) {
      int i = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(m)));
      if (i == prev) i = (i % m) + 1;
      if (i == prev) break;  // single factor cannot extend the word
      prev = i;
      int r = 1 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(sig.order(i) - 1)));
      w.syllables.emplace_back(i, r);
    }
    p.add_term(w, rng.complex_gaussian(dim, dim));
  }
  return p;
}

GroupPoly hermitianize(const GroupPoly& p) { return (p + p.adjoint()) * Complex(0.5, 0); }

}  // namespace

TEST_CASE("reduced multiplication with exponent arithmetic") {
  FreeProductSignature sig({2, 3});
  // (x1 x2) * (x2^2) = x1 since x2^3 = e.
  GroupPoly a(sig, 1, 1), b(sig, 1, 1);
  GroupWord w1;
  w1.syllables = {{1, 1}, {2, 1}};
  a.add_term(w1, CMat::Identity(1, 1));
  GroupWord w2;
  w2.syllables = {{2, 2}};
  b.add_term(w2, CMat::Identity(1, 1));
  GroupPoly prod = a * b;
  REQUIRE(prod.terms().size() == 1);
  GroupWord expect;
  expect.syllables = {{1, 1}};
  CHECK(prod.terms().begin()->first == expect);
}

TEST_CASE("adjoint inverts syllables with exponent negation") {
  FreeProductSignature sig({2, 3});
  GroupPoly p(sig, 1, 1);
  GroupWord w;
  w.syllables = {{1, 1}, {2, 2}};  // x1 x2^2
  p.add_term(w, CMat::Identity(1, 1));
  GroupPoly pa = p.adjoint();
  GroupWord expect;
  expect.syllables = {{2, 1}, {1, 1}};  // x2 x1
  REQUIRE(pa.terms().size() == 1);
  CHECK(pa.terms().begin()->first == expect);

  GroupWord triple;
  triple.syllables = {{1, 1}, {2, 1}, {1, 1}};
  CHECK(triple.extent() == 3);
}

TEST_CASE("reduction is confluent across association orders") {
  FreeProductSignature sig({2, 3, 4});
  Rng rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    GroupPoly a = random_group_poly(rng, sig, 2, 1);
    GroupPoly b = random_group_poly(rng, sig, 2, 1);
    GroupPoly c = random_group_poly(rng, sig, 2, 1);
    CHECK((((a * b) * c) - (a * (b * c))).max_coeff_norm() <= 1e-12);
  }
}

TEST_CASE("spectral projections satisfy the projection relations") {
  for (int n = 2; n <= 6; ++n) {
    auto qs = spectral_projections(n);
    REQUIRE(qs.size() == static_cast<std::size_t>(n));
    FreeProductSignature sig({n});
    GroupPoly sum(sig, 1, 1);
    for (int k = 0; k < n; ++k) {
      sum = sum + qs[static_cast<std::size_t>(k)];
      CHECK((qs[static_cast<std::size_t>(k)].adjoint() - qs[static_cast<std::size_t>(k)]).max_coeff_norm() <=
            1e-12);
      CHECK((qs[static_cast<std::size_t>(k)] * qs[static_cast<std::size_t>(k)] - qs[static_cast<std::size_t>(k)])
                .max_coeff_norm() <= 1e-12);
      for (int l = 0; l < n; ++l)
        if (l != k)
          CHECK((qs[static_cast<std::size_t>(k)] * qs[static_cast<std::size_t>(l)]).max_coeff_norm() <= 1e-12);
    }
    CHECK((sum - GroupPoly::identity(sig, 1)).max_coeff_norm() <= 1e-12);
  }

  // n = 2: q1 = (1 - x)/2, q2 = (1 + x)/2.
  auto q2 = spectral_projections(2);
  FreeProductSignature z2({2});
  GroupWord x;
  x.syllables = {{1, 1}};
  CHECK(std::abs(q2[0].coefficient(GroupWord{})(0, 0) - Complex(0.5, 0)) <= 1e-15);
  CHECK(std::abs(q2[0].coefficient(x)(0, 0) - Complex(-0.5, 0)) <= 1e-15);
  CHECK(std::abs(q2[1].coefficient(x)(0, 0) - Complex(0.5, 0)) <= 1e-15);
}

TEST_CASE("omega map images of generators") {
  FreeProductSignature z2({2});
  GroupPoly x = GroupPoly::generator_power(z2, 1, 1);
  NCPoly img = omega_map(x);
  // Omega(x) = 1 - 2 y1.
  CHECK(std::abs(img.coefficient(Word{})(0, 0) - Complex(1, 0)) <= 1e-15);
  CHECK(std::abs(img.coefficient(Word{1})(0, 0) - Complex(-2, 0)) <= 1e-15);

  CHECK((omega_map(GroupPoly::identity(z2, 2)) - NCPoly::identity(1, 2)).max_coeff_norm() == 0.0);

  FreeProductSignature z22({2, 2});
  GroupPoly x1x2 = GroupPoly::generator_power(z22, 1, 1) * GroupPoly::generator_power(z22, 2, 1);
  NCPoly img2 = omega_map(x1x2);
  CHECK(img2.degree_or(0) == 2);
  // (1 - 2 y1)(1 - 2 y2): check the cross coefficient.
  CHECK(std::abs(img2.coefficient(Word{1, 2})(0, 0) - Complex(4, 0)) <= 1e-15);
  CHECK(img2.coefficient(Word{2, 1}).isZero(0.0));
}

TEST_CASE("splitting inverts the omega map") {
  FreeProductSignature z2({2});
  NCPoly y1 = NCPoly::letter(1, 1);
  GroupPoly s_y1 = split_map(y1, z2);
  GroupWord x;
  x.syllables = {{1, 1}};
  CHECK(std::abs(s_y1.coefficient(GroupWord{})(0, 0) - Complex(0.5, 0)) <= 1e-15);
  CHECK(std::abs(s_y1.coefficient(x)(0, 0) - Complex(-0.5, 0)) <= 1e-15);

  CHECK((split_map(NCPoly::identity(1, 1), z2) - GroupPoly::identity(z2, 1)).max_coeff_norm() == 0.0);

  GroupPoly gx = GroupPoly::generator_power(z2, 1, 1);
  CHECK((split_map(omega_map(gx), z2) - gx).max_coeff_norm() <= 1e-12);

  Rng rng(19);
  for (auto factors : std::vector<std::vector<int>>{{2, 2}, {2, 3}, {3, 3}, {2, 2, 2}}) {
    FreeProductSignature sig(factors);
    for (int rep = 0; rep < 50; ++rep) {
      GroupPoly z = random_group_poly(rng, sig, 3, 2);
      CHECK((split_map(omega_map(z), sig) - z).max_coeff_norm() <= 1e-12);
    }
  }
}

TEST_CASE("extent of a split image is bounded by the degree") {
  Rng rng(29);
  FreeProductSignature sig({2, 3});
  for (int rep = 0; rep < 50; ++rep) {
    NCPoly f = rng.nc_poly(sig.povm_variables(), 2, 1, 1);
    CHECK(split_map(f, sig).extent() <= f.degree_or(0));
  }
}

TEST_CASE("evaluation at unitary tuples") {
  FreeProductSignature z3({3});
  GroupPoly p(z3, 1, 1);
  p.add_term(GroupWord{}, CMat::Constant(1, 1, Complex(2, 0)));
  GroupWord x, xx;
  x.syllables = {{1, 1}};
  xx.syllables = {{1, 2}};
  p.add_term(x, CMat::Identity(1, 1));
  p.add_term(xx, CMat::Identity(1, 1));

  CMat omega = CMat::Constant(1, 1, z3.root_power(1, 1));
  CMat val = p.evaluate({omega});
  CHECK(std::abs(val(0, 0) - Complex(1, 0)) <= 1e-12);  // 2 + w + w^2 = 1

  CHECK((GroupPoly::identity(z3, 2).evaluate({omega}) - CMat::Identity(2, 2)).norm() == 0.0);

  Rng rng(37);
  FreeProductSignature sig({2, 3});
  for (int rep = 0; rep < 10; ++rep) {
    auto U = sample_unitary_tuple(sig, 3, 100 + static_cast<std::uint64_t>(rep));
    CHECK(unitary_tuple_defect(U) <= 1e-10);
    GroupPoly h = hermitianize(random_group_poly(rng, sig, 2, 2));
    CMat hv = h.evaluate(U.U);
    CHECK((hv - hv.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
  }

  auto U1 = sample_unitary_tuple(sig, 2, 5);
  auto U2 = sample_unitary_tuple(sig, 2, 5);
  for (std::size_t i = 0; i < U1.U.size(); ++i) CHECK((U1.U[i] - U2.U[i]).norm() == 0.0);
}

TEST_CASE("positivity transfers from povm samples to unitary samples") {
  FreeProductSignature sig({2, 2});
  Rng rng(53);
  GroupPoly h = hermitianize(random_group_poly(rng, sig, 2, 1));
  NCPoly img = omega_map(h);

  double min_unitary = std::numeric_limits<double>::infinity();
  double min_povm = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 100; ++rep) {
    auto U = sample_unitary_tuple(sig, 2, 200 + static_cast<std::uint64_t>(rep));
    min_unitary = std::min(min_unitary, min_eigenvalue(h.evaluate(U.U)));
    // The projective tuple p_{i,j}(U) is a povm tuple realizing the same value,
    // so the povm side of the sample always reaches at least as low.
    std::vector<CMat> Eproj;
    for (int i = 1; i <= 2; ++i)
      for (int j = 1; j < sig.order(i); ++j)
        Eproj.push_back(spectral_projection(sig, i, j).evaluate(U.U));
    min_povm = std::min(min_povm, min_eigenvalue(img.evaluate(Eproj)));
  }
  Rng prng(54);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<CMat> E;
    for (int j = 0; j < 2; ++j) {
      CMat g = prng.complex_gaussian(2, 2);
      CMat h2 = g * g.adjoint();
      E.push_back(h2 / (h2.trace().real() + 1.0));  // psd with sum <= I
    }
    min_povm = std::min(min_povm, min_eigenvalue(img.evaluate(E)));
  }
  // Unitary representations factor through povm tuples, so the povm minimum
  // can only be lower.
  CHECK(min_unitary >= min_povm - 1e-6);
}

TEST_CASE("naimark dilation reproduces the povm by compression") {
  FreeProductSignature z2({2});

  // Scalar half mass: dilated space has dimension 2 and U is a symmetry.
  PovmTuple half{z2, {CMat::Constant(1, 1, Complex(0.5, 0))}};
  auto dil = naimark_dilate(half);
  CHECK(dil.U.U[0].rows() == 2);
  CHECK(unitary_tuple_defect(dil.U) <= 1e-10);
  GroupPoly q1 = spectral_projection(z2, 1, 1);
  CMat compressed = dil.V.adjoint() * q1.evaluate(dil.U.U) * dil.V;
  CHECK(std::abs(compressed(0, 0) - Complex(0.5, 0)) <= 1e-8);

  // Projective input embeds identically (no enlargement).
  PovmTuple proj{z2, {CMat::Identity(1, 1)}};
  auto dil2 = naimark_dilate(proj);
  CHECK(dil2.U.U[0].rows() == 1);
  CHECK(std::abs(dil2.U.U[0](0, 0) - z2.root_power(1, 1)) <= 1e-12);

  // General random povm tuples: compression identity within 1e-8.
  Rng rng(61);
  FreeProductSignature sig({2, 3});
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<CMat> E;
    for (int i = 1; i <= 2; ++i) {
      int n = sig.order(i);
      std::vector<CMat> elems;
      CMat sum = CMat::Zero(2, 2);
      for (int j = 1; j < n; ++j) {
        CMat g = rng.complex_gaussian(2, 2);
        elems.push_back(g * g.adjoint());
        sum += elems.back();
      }
      double scale = 1.0 / std::max(1.0, sum.operatorNorm() * 1.05);
      for (auto& e : elems) E.push_back(e * scale);
    }
    PovmTuple tuple{sig, E};
    REQUIRE(tuple.validity_margin() >= -1e-12);
    auto d3 = naimark_dilate(tuple);
    CHECK(unitary_tuple_defect(d3.U) <= 1e-10);
    int idx = 0;
    for (int i = 1; i <= 2; ++i)
      for (int j = 1; j < sig.order(i); ++j, ++idx) {
        GroupPoly pij = spectral_projection(sig, i, j);
        CMat back = d3.V.adjoint() * pij.evaluate(d3.U.U) * d3.V;
        CHECK((back - E[static_cast<std::size_t>(idx)]).cwiseAbs().maxCoeff() <= 1e-8);
      }
  }
}

TEST_CASE("group word validation rejects malformed input") {
  FreeProductSignature sig({2, 3});
  GroupPoly p(sig, 1, 1);
  GroupWord bad;
  bad.syllables = {{1, 1}, {1, 1}};  // adjacent same factor
  CHECK_THROWS(p.add_term(bad, CMat::Identity(1, 1)));
  GroupWord range;
  range.syllables = {{1, 2}};  // exponent 2 in Z_2 is not reduced
  CHECK_THROWS(p.add_term(range, CMat::Identity(1, 1)));
  CHECK_THROWS(FreeProductSignature({1}));
}
