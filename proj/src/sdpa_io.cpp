#include "ncsos/sdpa_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace ncsos::sdp {

namespace {

void print_value(std::ostream& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out << buf;
}

struct Quint {
  int mat, blk, i, j;
  double v;
};

}  // namespace

void export_sdpa(const SdpProblem& problem, std::ostream& out) {
  if (!problem.is_real())
    throw std::invalid_argument("export_sdpa: problem must be realified first");
  problem.validate();

  const auto m = problem.constraints.size();
  out << m << "\n";
  out << problem.block_sizes.size() << "\n";
  for (std::size_t b = 0; b < problem.block_sizes.size(); ++b) {
    if (b) out << " ";
    out << problem.block_sizes[b];
  }
  out << "\n";
  for (std::size_t i = 0; i < m; ++i) {
    if (i) out << " ";
    print_value(out, problem.constraints[i].rhs);
  }
  out << "\n";

  auto emit = [&](int matno, const std::vector<ConstraintMat>& mats, double scale) {
    // Collate duplicates and order entries deterministically.
    std::map<std::tuple<int, int, int>, double> acc;
    for (const auto& mat : mats)
      for (const auto& e : mat.entries) {
        int r = e.row, c = e.col;
        if (r > c) std::swap(r, c);
        acc[{mat.block, r, c}] += scale * e.value.real();
      }
    for (const auto& [key, v] : acc) {
      if (v == 0.0) continue;
      auto [blk, r, c] = key;
      out << matno << " " << blk + 1 << " " << r + 1 << " " << c + 1 << " ";
      print_value(out, v);
      out << "\n";
    }
  };

  emit(0, problem.objective, -1.0);  // F_0 = -C
  for (std::size_t i = 0; i < m; ++i) emit(static_cast<int>(i) + 1, problem.constraints[i].mats, 1.0);
}

void export_sdpa_file(const SdpProblem& problem, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("export_sdpa: cannot open " + path);
  export_sdpa(problem, f);
  if (!f.good()) throw std::runtime_error("export_sdpa: write failure on " + path);
}

SdpProblem import_sdpa(std::istream& in) {
  std::string line;
  auto next_data_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      std::size_t pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos) continue;
      char c = line[pos];
      if (c == '"' || c == '*' || c == '#') continue;
      return line;
    }
    throw std::runtime_error("import_sdpa: unexpected end of file");
  };
  auto parse_ints = [](const std::string& s) {
    std::vector<long> vals;
    std::istringstream iss(s);
    // SDPA allows separators like commas, parens and braces in the block line.
    std::string tok;
    while (iss >> tok) {
      std::string cleaned;
      for (char c : tok)
        if ((c >= '0' && c <= '9') || c == '-' || c == '+') cleaned += c;
      if (!cleaned.empty()) vals.push_back(std::stol(cleaned));
    }
    return vals;
  };

  auto mline = parse_ints(next_data_line());
  if (mline.empty()) throw std::runtime_error("import_sdpa: missing constraint count");
  const auto m = static_cast<std::size_t>(mline[0]);
  auto bline = parse_ints(next_data_line());
  if (bline.empty()) throw std::runtime_error("import_sdpa: missing block count");
  const auto nblocks = static_cast<std::size_t>(bline[0]);
  auto sizes = parse_ints(next_data_line());
  if (sizes.size() != nblocks) throw std::runtime_error("import_sdpa: block size list length mismatch");

  SdpProblem p;
  for (long s : sizes) p.block_sizes.push_back(static_cast<int>(std::abs(s)));  // negative = diagonal
  p.constraints.resize(m);

  {
    std::istringstream iss(next_data_line());
    for (std::size_t i = 0; i < m; ++i) {
      double v;
      if (!(iss >> v)) throw std::runtime_error("import_sdpa: objective vector too short");
      p.constraints[i].rhs = v;
    }
  }

  std::map<std::pair<int, int>, std::map<std::pair<int, int>, double>> data;  // (mat, blk) -> entries
  int matno, blkno, i, j;
  double v;
  while (in >> matno >> blkno >> i >> j >> v) {
    if (matno < 0 || static_cast<std::size_t>(matno) > m) throw std::runtime_error("import_sdpa: bad matrix index");
    if (blkno < 1 || static_cast<std::size_t>(blkno) > nblocks)
      throw std::runtime_error("import_sdpa: bad block index");
    int r = i - 1, c = j - 1;
    if (r > c) std::swap(r, c);
    data[{matno, blkno - 1}][{r, c}] += v;
  }

  for (const auto& [key, entries] : data) {
    auto [matno2, blk] = key;
    ConstraintMat cm;
    cm.block = blk;
    for (const auto& [rc, val] : entries)
      if (val != 0.0) cm.entries.push_back({rc.first, rc.second, Complex(val, 0)});
    if (cm.entries.empty()) continue;
    if (matno2 == 0) {
      for (auto& e : cm.entries) e.value = -e.value;  // C = -F_0
      p.objective.push_back(std::move(cm));
    } else {
      p.constraints[static_cast<std::size_t>(matno2 - 1)].mats.push_back(std::move(cm));
    }
  }
  p.validate();
  return p;
}

SdpProblem import_sdpa_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("import_sdpa: cannot open " + path);
  return import_sdpa(f);
}

}  // namespace ncsos::sdp
