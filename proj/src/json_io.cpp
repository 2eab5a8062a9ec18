#include "ncsos/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace ncsos::io {

json matrix_to_json_re(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).real());
    rows.push_back(std::move(row));
  }
  return rows;
}

json matrix_to_json_im(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j).imag());
    rows.push_back(std::move(row));
  }
  return rows;
}

CMat matrix_from_json(const json& re, const json& im, int rows, int cols) {
  CMat m(rows, cols);
  if (static_cast<int>(re.size()) != rows) throw std::invalid_argument("matrix json: wrong row count in 're'");
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(re[static_cast<std::size_t>(i)].size()) != cols)
      throw std::invalid_argument("matrix json: wrong column count in 're'");
    for (int j = 0; j < cols; ++j) {
      double a = re[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
      double b = 0;
      if (!im.is_null()) {
        if (static_cast<int>(im.size()) != rows || static_cast<int>(im[static_cast<std::size_t>(i)].size()) != cols)
          throw std::invalid_argument("matrix json: 'im' shape mismatch");
        b = im[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
      }
      m(i, j) = Complex(a, b);
    }
  }
  return m;
}

json ncpoly_to_json(const NCPoly& p) {
  json j;
  j["g"] = p.g();
  if (p.square())
    j["coeff_dim"] = p.rows();
  else {
    j["rows"] = p.rows();
    j["cols"] = p.cols();
  }
  json terms = json::array();
  for (const auto& [w, c] : p.terms()) {
    json t;
    t["word"] = w;
    t["re"] = matrix_to_json_re(c);
    t["im"] = matrix_to_json_im(c);
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j;
}

NCPoly ncpoly_from_json(const json& j) {
  if (!j.contains("g")) throw std::invalid_argument("polynomial json: missing field 'g'");
  int g = j.at("g").get<int>();
  int rows, cols;
  if (j.contains("coeff_dim")) {
    rows = cols = j.at("coeff_dim").get<int>();
  } else if (j.contains("rows") && j.contains("cols")) {
    rows = j.at("rows").get<int>();
    cols = j.at("cols").get<int>();
  } else {
    throw std::invalid_argument("polynomial json: missing 'coeff_dim' (or 'rows'/'cols')");
  }
  NCPoly p(g, rows, cols);
  for (const auto& t : j.value("terms", json::array())) {
    Word w = t.at("word").get<Word>();
    p.add_term(w, matrix_from_json(t.at("re"), t.contains("im") ? t.at("im") : json(), rows, cols));
  }
  return p;
}

json pencil_to_json(const LinearPencil& L) {
  json j;
  j["g"] = L.g;
  j["mu"] = L.mu;
  json coeffs = json::array();
  for (const auto& A : L.coeffs) {
    json c;
    c["re"] = matrix_to_json_re(A);
    c["im"] = matrix_to_json_im(A);
    coeffs.push_back(std::move(c));
  }
  j["coeffs"] = std::move(coeffs);
  json blocks = json::array();
  for (const auto& b : L.blocks) blocks.push_back(json::array({b.offset, b.size}));
  j["blocks"] = std::move(blocks);
  return j;
}

LinearPencil pencil_from_json(const json& j) {
  int g = j.at("g").get<int>();
  int mu = j.at("mu").get<int>();
  const auto& coeffs = j.at("coeffs");
  if (static_cast<int>(coeffs.size()) != g + 1)
    throw std::invalid_argument("pencil json: need g+1 coefficient matrices A0..Ag");
  std::vector<CMat> A;
  for (const auto& c : coeffs)
    A.push_back(matrix_from_json(c.at("re"), c.contains("im") ? c.at("im") : json(), mu, mu));
  std::vector<PencilBlock> blocks;
  for (const auto& b : j.value("blocks", json::array()))
    blocks.push_back(PencilBlock{b.at(0).get<int>(), b.at(1).get<int>()});
  return LinearPencil(g, std::move(A), std::move(blocks));
}

json grouppoly_to_json(const groupfree::GroupPoly& p) {
  json j;
  j["factors"] = p.signature().factors;
  if (p.rows() == p.cols())
    j["coeff_dim"] = p.rows();
  else {
    j["rows"] = p.rows();
    j["cols"] = p.cols();
  }
  json terms = json::array();
  for (const auto& [w, c] : p.terms()) {
    json t;
    json word = json::array();
    for (const auto& [i, r] : w.syllables) word.push_back(json::array({i, r}));
    t["word"] = std::move(word);
    t["re"] = matrix_to_json_re(c);
    t["im"] = matrix_to_json_im(c);
    terms.push_back(std::move(t));
  }
  j["terms"] = std::move(terms);
  return j;
}

groupfree::GroupPoly grouppoly_from_json(const json& j) {
  groupfree::FreeProductSignature sig(j.at("factors").get<std::vector<int>>());
  int rows, cols;
  if (j.contains("coeff_dim")) {
    rows = cols = j.at("coeff_dim").get<int>();
  } else {
    rows = j.at("rows").get<int>();
    cols = j.at("cols").get<int>();
  }
  groupfree::GroupPoly p(sig, rows, cols);
  for (const auto& t : j.value("terms", json::array())) {
    groupfree::GroupWord w;
    for (const auto& syl : t.at("word")) w.syllables.emplace_back(syl.at(0).get<int>(), syl.at(1).get<int>());
    p.add_term(w, matrix_from_json(t.at("re"), t.contains("im") ? t.at("im") : json(), rows, cols));
  }
  return p;
}

json certificate_to_json(const certify::Certificate& cert) {
  json j;
  j["format"] = 1;
  j["residual"] = cert.residual;
  j["sos_factor"] = ncpoly_to_json(cert.r);
  json qs = json::array();
  for (std::size_t k = 0; k < cert.q_blocks.size(); ++k) {
    json q;
    q["block"] = k;
    q["rank"] = cert.q_ranks[k];
    q["factor"] = ncpoly_to_json(cert.q_blocks[k]);
    qs.push_back(std::move(q));
  }
  j["localizing_factors"] = std::move(qs);
  return j;
}

json witness_to_json(const certify::MomentWitness& wit) {
  json j;
  j["format"] = 1;
  j["value"] = wit.value;
  j["pencil_min_eig"] = wit.pencil_min_eig;
  j["accurate"] = wit.accurate;
  json Y = json::array();
  for (const auto& Yj : wit.Y) {
    json m;
    m["re"] = matrix_to_json_re(Yj);
    m["im"] = matrix_to_json_im(Yj);
    Y.push_back(std::move(m));
  }
  j["Y"] = std::move(Y);
  json gr = json::array(), gi = json::array();
  for (Eigen::Index i = 0; i < wit.gamma.size(); ++i) {
    gr.push_back(wit.gamma(i).real());
    gi.push_back(wit.gamma(i).imag());
  }
  j["gamma_re"] = std::move(gr);
  j["gamma_im"] = std::move(gi);
  return j;
}

json decision_to_json(const certify::Decision& dec) {
  json j;
  j["format"] = 1;
  j["verdict"] = certify::to_string(dec.verdict);
  j["degree"] = dec.degree;
  j["shift_opt"] = dec.shift_opt;
  j["solver_status"] = sdp::to_string(dec.solver_status);
  if (!dec.detail.empty()) j["detail"] = dec.detail;
  if (dec.certificate) j["certificate"] = certificate_to_json(*dec.certificate);
  if (dec.witness) j["witness"] = witness_to_json(*dec.witness);
  return j;
}

json factorization_to_json(const fejer::FactorizationResult& fr) {
  json j;
  j["format"] = 1;
  j["N"] = fr.N;
  j["extent_bound"] = fr.extent_bound;
  j["coeff_residual"] = fr.coeff_residual;
  j["sample_margin"] = fr.sample_margin;
  json qs = json::array();
  for (const auto& q : fr.summands) qs.push_back(grouppoly_to_json(q));
  j["summands"] = std::move(qs);
  return j;
}

json fejer_verdict_to_json(const fejer::Verdict& v) {
  json j;
  j["format"] = 1;
  j["status"] = fejer::to_string(v.status);
  j["shift_opt"] = v.shift_opt;
  if (!v.detail.empty()) j["detail"] = v.detail;
  if (v.factorization) j["factorization"] = factorization_to_json(*v.factorization);
  if (v.witness) {
    json w;
    w["povm_value"] = v.witness->povm_value;
    json E = json::array();
    for (const auto& Ei : v.witness->E.E) {
      json m;
      m["re"] = matrix_to_json_re(Ei);
      m["im"] = matrix_to_json_im(Ei);
      E.push_back(std::move(m));
    }
    w["E"] = std::move(E);
    json xr = json::array(), xi = json::array();
    for (Eigen::Index i = 0; i < v.witness->xi.size(); ++i) {
      xr.push_back(v.witness->xi(i).real());
      xi.push_back(v.witness->xi(i).imag());
    }
    w["xi_re"] = std::move(xr);
    w["xi_im"] = std::move(xi);
    w["unitary_verified"] = v.witness->unitary_verified;
    if (v.witness->U) {
      w["unitary_value"] = v.witness->unitary_value;
      json U = json::array();
      for (const auto& Ui : v.witness->U->U) {
        json m;
        m["re"] = matrix_to_json_re(Ui);
        m["im"] = matrix_to_json_im(Ui);
        U.push_back(std::move(m));
      }
      w["U"] = std::move(U);
    }
    j["witness"] = std::move(w);
  }
  return j;
}

json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void save_json_file(const json& j, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
}

}  // namespace ncsos::io
