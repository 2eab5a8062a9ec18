// Command-line driver: positivity certificates on free spectrahedra and
// Fejer-Riesz factorization on free products of finite cyclic groups.
//
// Exit codes: 0 = positive/certified, 1 = not positive (witness written),
// 2 = inaccurate, 3 = usage or input error.
#include <CLI11.hpp>
#include <iostream>

#include "ncsos/certify.hpp"
#include "ncsos/fejer.hpp"
#include "ncsos/fock.hpp"
#include "ncsos/json_io.hpp"
#include "ncsos/sdpa_io.hpp"

namespace {

using namespace ncsos;

constexpr int kExitPositive = 0;
constexpr int kExitNotPositive = 1;
constexpr int kExitInaccurate = 2;
constexpr int kExitUsage = 3;

struct CertifyArgs {
  std::string poly_path, pencil_path, out_path;
  std::string degree = "auto";
  std::string solver = "internal";
  double tol = 0;  // 0 = library defaults
  std::uint64_t seed = 0;
};

certify::DecideOptions decide_options(const CertifyArgs& a) {
  certify::DecideOptions opts;
  if (a.tol > 0) opts.sdp.tol_feas = opts.sdp.tol_gap = a.tol;
  opts.seed = a.seed;
  if (a.degree != "auto") opts.degree_override = std::stoi(a.degree);
  return opts;
}

int verdict_exit(certify::Verdict v) {
  switch (v) {
    case certify::Verdict::Positive: return kExitPositive;
    case certify::Verdict::NotPositive: return kExitNotPositive;
    case certify::Verdict::Inaccurate: return kExitInaccurate;
  }
  return kExitInaccurate;
}

int run_certify(const CertifyArgs& a, bool witness_only) {
  NCPoly p = io::ncpoly_from_json(io::load_json_file(a.poly_path));
  LinearPencil L = io::pencil_from_json(io::load_json_file(a.pencil_path));

  if (a.solver == "sdpa-file") {
    auto mp = certify::make_membership(p, L, decide_options(a).degree_override);
    auto assembled = certify::assemble_membership_sdp_ex(mp.p, mp.L, mp.d, mp.d, /*with_shift=*/true);
    std::string path = a.out_path.empty() ? "membership.dat-s" : a.out_path;
    sdp::export_sdpa_file(sdp::realify(assembled.problem), path);
    std::cout << "wrote " << path << " (solve externally; internal verdict skipped)\n";
    return kExitPositive;
  }

  auto dec = certify::decide_membership(p, L, decide_options(a));
  if (!a.out_path.empty()) io::save_json_file(io::decision_to_json(dec), a.out_path);
  std::cout << "verdict: " << certify::to_string(dec.verdict) << " (degree " << dec.degree << ", shift "
            << dec.shift_opt << ")\n";
  if (!dec.detail.empty()) std::cout << dec.detail << "\n";
  if (witness_only && dec.verdict == certify::Verdict::Positive)
    std::cout << "note: polynomial is certified positive; no witness exists\n";
  return verdict_exit(dec.verdict);
}

int run_factorize(const CertifyArgs& a) {
  auto p = io::grouppoly_from_json(io::load_json_file(a.poly_path));
  fejer::FactorizationOptions opts;
  if (a.tol > 0) opts.decide.sdp.tol_feas = opts.decide.sdp.tol_gap = a.tol;
  opts.seed = a.seed;
  if (a.degree != "auto") opts.degree_override = std::stoi(a.degree);
  auto verdict = fejer::factorize(p, opts);
  if (!a.out_path.empty()) io::save_json_file(io::fejer_verdict_to_json(verdict), a.out_path);
  std::cout << "status: " << fejer::to_string(verdict.status) << "\n";
  if (verdict.factorization)
    std::cout << "summands: " << verdict.factorization->N << ", residual "
              << verdict.factorization->coeff_residual << ", extent bound "
              << verdict.factorization->extent_bound << "\n";
  if (verdict.witness) std::cout << "witness value: " << verdict.witness->povm_value << "\n";
  if (!verdict.detail.empty()) std::cout << verdict.detail << "\n";
  switch (verdict.status) {
    case fejer::Status::Positive: return kExitPositive;
    case fejer::Status::NotPositive: return kExitNotPositive;
    case fejer::Status::Inaccurate: return kExitInaccurate;
  }
  return kExitInaccurate;
}

int run_extract_check(int g, int depth, int count, std::uint64_t seed, bool dump) {
  auto fock = build_fock_tuple(g, depth);
  auto ext = extraction_matrix(fock);
  Rng rng(seed);
  double max_err = 0;
  for (int i = 0; i < count; ++i) {
    NCPoly q = rng.nc_poly(g, depth, 2, 2);
    NCPoly back = extract_coefficients(fock.evaluate(q), fock, 2, ext);
    max_err = std::max(max_err, (q - back).max_coeff_norm());
  }
  if (dump) {
    io::json j;
    j["g"] = g;
    j["depth"] = depth;
    j["condition"] = ext.condition;
    j["lambda_bound"] = ext.lambda_bound;
    j["max_roundtrip_error"] = max_err;
    j["M"] = io::matrix_to_json_re(ext.M.cast<Complex>());
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "extraction matrix condition " << ext.condition << ", max round-trip error " << max_err
              << " over " << count << " random polynomials\n";
  }
  return max_err <= 1e-9 ? kExitPositive : kExitInaccurate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ncsos: positivity certificates for operator-valued noncommutative polynomials"};
  app.require_subcommand(1);

  CertifyArgs cert_args, wit_args, fact_args, export_args;

  auto add_common = [](CLI::App* cmd, CertifyArgs& a, bool pencil_required) {
    cmd->add_option("--poly", a.poly_path, "input polynomial JSON")->required();
    auto* p = cmd->add_option("--pencil", a.pencil_path, "input pencil JSON");
    if (pencil_required) p->required();
    cmd->add_option("--out", a.out_path, "output JSON path");
    cmd->add_option("--degree", a.degree, "certificate degree: auto or an integer >= the bound");
    cmd->add_option("--tol", a.tol, "solver tolerance (default: library tolerances)");
    cmd->add_option("--seed", a.seed, "seed for verification sampling");
    cmd->add_option("--solver", a.solver, "internal | sdpa-file");
  };

  auto* c_certify = app.add_subcommand("certify", "weighted-SOS membership on a free spectrahedron");
  add_common(c_certify, cert_args, true);
  auto* c_witness = app.add_subcommand("witness", "negative-case GNS witness extraction");
  add_common(c_witness, wit_args, true);
  auto* c_fact = app.add_subcommand("factorize", "Fejer-Riesz factorization on a free product of cyclic groups");
  add_common(c_fact, fact_args, false);
  auto* c_export = app.add_subcommand("export-sdpa", "write the membership SDP in SDPA sparse format");
  add_common(c_export, export_args, true);

  int eg = 2, edepth = 2, ecount = 25;
  std::uint64_t eseed = 0;
  bool edump = false;
  auto* c_check = app.add_subcommand("extract-check", "Fock coefficient-extraction self-test");
  c_check->add_option("--g", eg, "alphabet size");
  c_check->add_option("--depth", edepth, "truncation degree");
  c_check->add_option("--count", ecount, "number of random polynomials");
  c_check->add_option("--seed", eseed, "sampling seed");
  c_check->add_flag("--dump-extraction", edump, "dump M and its condition number as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (c_certify->parsed()) return run_certify(cert_args, false);
    if (c_witness->parsed()) return run_certify(wit_args, true);
    if (c_fact->parsed()) return run_factorize(fact_args);
    if (c_check->parsed()) return run_extract_check(eg, edepth, ecount, eseed, edump);
    if (c_export->parsed()) {
      export_args.solver = "sdpa-file";
      return run_certify(export_args, false);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
