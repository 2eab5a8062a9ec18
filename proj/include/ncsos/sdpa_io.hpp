// SDPA sparse format (.dat-s) writer and parser.
//
// The file encodes the pair
//   (P) min c'x  s.t.  sum_k x_k F_k - F_0 >= 0
//   (D) max <F_0, Y>  s.t.  <F_k, Y> = c_k,  Y >= 0;
// our SdpProblem (min <C,X>, <A_i,X> = b_i) is stored as (D) with F_k = A_k,
// c = b and F_0 = -C.  Problems must be realified before export.
#pragma once

#include <iosfwd>
#include <string>

#include "ncsos/sdp.hpp"

namespace ncsos::sdp {

void export_sdpa(const SdpProblem& problem, std::ostream& out);
void export_sdpa_file(const SdpProblem& problem, const std::string& path);

SdpProblem import_sdpa(std::istream& in);
SdpProblem import_sdpa_file(const std::string& path);

}  // namespace ncsos::sdp
