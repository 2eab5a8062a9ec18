// JSON wire formats for polynomials, pencils, group polynomials, certificates,
// witnesses and factorization results.
#pragma once

#include <string>

#include <json.hpp>

#include "ncsos/certify.hpp"
#include "ncsos/fejer.hpp"
#include "ncsos/groupfree.hpp"
#include "ncsos/ncpoly.hpp"
#include "ncsos/pencil.hpp"

namespace ncsos::io {

using json = nlohmann::ordered_json;

json matrix_to_json_re(const CMat& m);
json matrix_to_json_im(const CMat& m);
CMat matrix_from_json(const json& re, const json& im, int rows, int cols);

// {"g": int, "coeff_dim": int, "terms": [{"word": [1-based letters], "re": [[..]], "im": [[..]]}]}
// Rectangular factors use "rows"/"cols" in place of "coeff_dim".
json ncpoly_to_json(const NCPoly& p);
NCPoly ncpoly_from_json(const json& j);

// {"g": int, "mu": int, "coeffs": [{"re":..,"im":..} x (g+1)], "blocks": [[offset,size]..]}
json pencil_to_json(const LinearPencil& L);
LinearPencil pencil_from_json(const json& j);

// {"factors": [n_1..n_m], "coeff_dim": nu, "terms": [{"word": [[i,r]..], "re":.., "im":..}]}
json grouppoly_to_json(const groupfree::GroupPoly& p);
groupfree::GroupPoly grouppoly_from_json(const json& j);

json certificate_to_json(const certify::Certificate& cert);
json witness_to_json(const certify::MomentWitness& wit);
json decision_to_json(const certify::Decision& dec);
json factorization_to_json(const fejer::FactorizationResult& fr);
json fejer_verdict_to_json(const fejer::Verdict& v);

json load_json_file(const std::string& path);
void save_json_file(const json& j, const std::string& path);

}  // namespace ncsos::io
