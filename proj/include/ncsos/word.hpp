// Free-monoid words and graded-lexicographic word bases.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncsos {

// A word in the free monoid on letters x_1..x_g; letters are 1-based.
// The empty vector is the empty word.
using Word = std::vector<int>;

inline Word word_concat(const Word& u, const Word& v) {
  Word w = u;
  w.insert(w.end(), v.begin(), v.end());
  return w;
}

inline Word word_reverse(const Word& u) { return Word(u.rbegin(), u.rend()); }

// u* v, i.e. reverse(u) concatenated with v.
inline Word word_star_concat(const Word& u, const Word& v) {
  Word w = word_reverse(u);
  w.insert(w.end(), v.begin(), v.end());
  return w;
}

// Graded lexicographic order: shorter words first, ties broken lexicographically.
struct GradedLexLess {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

inline bool word_self_adjoint(const Word& w) {
  return std::equal(w.begin(), w.end(), w.rbegin());
}

inline std::string word_to_string(const Word& w) {
  if (w.empty()) return "1";
  std::string s;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) s += ".";
    s += "x" + std::to_string(w[i]);
  }
  return s;
}

// N(d) = sum_{i=0}^{d} g^i, with an overflow guard.
inline std::size_t words_up_to(int g, int d, std::size_t cap = SIZE_MAX) {
  std::size_t n = 0, p = 1;
  for (int i = 0; i <= d; ++i) {
    n += p;
    if (n > cap) throw std::overflow_error("word basis size exceeds cap");
    if (i < d) {
      if (p > cap / static_cast<std::size_t>(g)) throw std::overflow_error("word basis size exceeds cap");
      p *= static_cast<std::size_t>(g);
    }
  }
  return n;
}

// All words of length <= d over letters 1..g, in graded lexicographic order,
// with an index map for coefficient/Gram bookkeeping.
class WordBasis {
 public:
  WordBasis() = default;

  WordBasis(int g, int d) : g_(g), d_(d) {
    if (g < 1) throw std::invalid_argument("alphabet size g must be >= 1");
    if (d < 0) throw std::invalid_argument("degree bound d must be >= 0");
    words_.push_back(Word{});
    std::size_t lo = 0, hi = 1;
    for (int len = 1; len <= d; ++len) {
      for (std::size_t i = lo; i < hi; ++i) {
        for (int a = 1; a <= g; ++a) {
          Word w = words_[i];
          w.push_back(a);
          words_.push_back(std::move(w));
        }
      }
      lo = hi;
      hi = words_.size();
    }
    for (std::size_t i = 0; i < words_.size(); ++i) index_[words_[i]] = i;
  }

  int g() const { return g_; }
  int degree() const { return d_; }
  std::size_t size() const { return words_.size(); }
  const Word& operator[](std::size_t i) const { return words_[i]; }
  const std::vector<Word>& words() const { return words_; }

  bool contains(const Word& w) const { return index_.count(w) != 0; }

  std::size_t index(const Word& w) const {
    auto it = index_.find(w);
    if (it == index_.end()) throw std::out_of_range("word not in basis: " + word_to_string(w));
    return it->second;
  }

 private:
  int g_ = 0;
  int d_ = -1;
  std::vector<Word> words_;
  std::map<Word, std::size_t, GradedLexLess> index_;
};

inline WordBasis enumerate_words(int g, int d) { return WordBasis(g, d); }

}  // namespace ncsos
