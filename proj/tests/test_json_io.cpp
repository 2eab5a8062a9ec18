#include <doctest.h>

#include "ncsos/json_io.hpp"
#include "ncsos/rng.hpp"

using namespace ncsos;

TEST_CASE("polynomial json round-trip") {
  Rng rng(3);
  NCPoly p = rng.nc_poly(2, 2, 2, 2);
  NCPoly q = io::ncpoly_from_json(io::ncpoly_to_json(p));
  CHECK(q.g() == p.g());
  CHECK((p - q).max_coeff_norm() == 0.0);

  // Rectangular factors carry rows/cols instead of coeff_dim.
  NCPoly r = rng.nc_poly(2, 1, 3, 2);
  NCPoly r2 = io::ncpoly_from_json(io::ncpoly_to_json(r));
  CHECK(r2.rows() == 3);
  CHECK((r - r2).max_coeff_norm() == 0.0);

  // The wire format uses 1-based letters and an empty array for the unit word.
  auto j = io::ncpoly_to_json(NCPoly::letter(2, 2));
  CHECK(j["terms"][0]["word"] == io::json::array({2}));
}

TEST_CASE("pencil json round-trip preserves blocks") {
  auto L = build_povm_pencil({2, 3});
  auto L2 = io::pencil_from_json(io::pencil_to_json(L));
  CHECK(L2.g == L.g);
  CHECK(L2.mu == L.mu);
  REQUIRE(L2.blocks.size() == L.blocks.size());
  for (std::size_t k = 0; k < L.blocks.size(); ++k) {
    CHECK(L2.blocks[k].offset == L.blocks[k].offset);
    CHECK(L2.blocks[k].size == L.blocks[k].size);
  }
  for (int j = 0; j <= L.g; ++j)
    CHECK((L2.coeffs[static_cast<std::size_t>(j)] - L.coeffs[static_cast<std::size_t>(j)])
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("group polynomial json round-trip") {
  groupfree::FreeProductSignature sig({2, 3});
  Rng rng(9);
  groupfree::GroupPoly p(sig, 2, 2);
  p.add_term(groupfree::GroupWord{}, rng.complex_gaussian(2, 2));
  groupfree::GroupWord w;
  w.syllables = {{1, 1}, {2, 2}};
  p.add_term(w, rng.complex_gaussian(2, 2));
  auto q = io::grouppoly_from_json(io::grouppoly_to_json(p));
  CHECK(q.signature() == p.signature());
  CHECK((p - q).max_coeff_norm() == 0.0);
}

TEST_CASE("malformed json reports the offending field") {
  io::json j;
  j["coeff_dim"] = 1;  // missing "g"
  CHECK_THROWS_WITH_AS(io::ncpoly_from_json(j), "polynomial json: missing field 'g'", std::invalid_argument);
}
