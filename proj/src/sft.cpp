#include "sftkms/sft.hpp"

#include <algorithm>

namespace sftkms {

Settings& settings() {
  static Settings s;
  return s;
}

namespace {

bool lex_less(const Word& a, std::span<const int> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

WordIndex::WordIndex(const IntMat& trans, int depth) : depth_(depth) {
  const int k = static_cast<int>(trans.rows());
  if (depth == 0) {
    words_.push_back({});
    return;
  }
  // depth-first enumeration over symbols in increasing order; yields
  // lexicographic order directly
  Word w;
  w.reserve(depth);
  auto extend = [&](auto&& self, int pos) -> void {
    if (pos == depth) {
      words_.push_back(w);
      if (static_cast<int>(words_.size()) > settings().dim_cap)
        fail("DimensionCap", "admissible word count at depth " + std::to_string(depth) +
                                 " exceeds cap " + std::to_string(settings().dim_cap));
      return;
    }
    for (int s = 0; s < k; ++s) {
      if (pos > 0 && trans(w[pos - 1], s) == 0) continue;
      w.push_back(s);
      self(self, pos + 1);
      w.pop_back();
    }
  };
  extend(extend, 0);
}

int WordIndex::find(std::span<const int> w) const {
  auto it = std::lower_bound(words_.begin(), words_.end(), w, lex_less);
  if (it == words_.end() || it->size() != w.size() ||
      !std::equal(it->begin(), it->end(), w.begin()))
    return -1;
  return static_cast<int>(it - words_.begin());
}

int WordIndex::index_of(std::span<const int> w) const {
  int i = find(w);
  if (i < 0) fail("BadWord", "word " + word_to_string(w) + " not admissible at depth " +
                                 std::to_string(depth_));
  return i;
}

bool is_primitive(const IntMat& trans) {
  const int k = static_cast<int>(trans.rows());
  // boolean powers up to the Wielandt bound (k-1)^2 + 1
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> p(k, k), step(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) p(i, j) = step(i, j) = trans(i, j) != 0;
  const int bound = (k - 1) * (k - 1) + 1;
  for (int n = 1; n <= bound; ++n) {
    bool all = true;
    for (int i = 0; i < k && all; ++i)
      for (int j = 0; j < k && all; ++j) all = p(i, j);
    if (all) return true;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> q(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) {
        bool v = false;
        for (int l = 0; l < k && !v; ++l) v = p(i, l) && step(l, j);
        q(i, j) = v;
      }
    p.swap(q);
  }
  return false;
}

Sft Sft::make(int k, const IntMat& trans) {
  if (k < 1) fail("BadShape", "alphabet size must be positive");
  if (trans.rows() != k || trans.cols() != k)
    fail("BadShape", "transition matrix must be " + std::to_string(k) + "x" + std::to_string(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (trans(i, j) != 0 && trans(i, j) != 1)
        fail("BadShape", "transition entries must be 0 or 1");
  for (int i = 0; i < k; ++i)
    if (trans.row(i).sum() == 0)
      fail("RowDead", "row " + std::to_string(i) + " of the transition matrix is zero");
  for (int j = 0; j < k; ++j)
    if (trans.col(j).sum() == 0)
      fail("NotSurjective", "column " + std::to_string(j) + " of the transition matrix is zero");

  auto data = std::make_shared<Data>();
  data->k = k;
  data->trans = trans;
  data->primitive = is_primitive(trans);
  return Sft(std::move(data));
}

const WordIndex& Sft::words(int depth) const {
  if (depth < 0) fail("BadShape", "negative depth");
  std::lock_guard<std::mutex> lock(data_->mutex);
  auto it = data_->cache.find(depth);
  if (it == data_->cache.end())
    it = data_->cache.emplace(depth, std::make_unique<WordIndex>(data_->trans, depth)).first;
  return *it->second;
}

bool Sft::same_as(const Sft& other) const {
  if (data_ == other.data_) return true;
  return data_->k == other.data_->k && data_->trans == other.data_->trans;
}

namespace {

const char kSymbolChars[] = "0123456789abcdefghijklmnopqrstuvwxyz";

}  // namespace

std::string word_to_string(std::span<const int> w) {
  std::string out;
  out.reserve(w.size());
  for (int s : w) {
    if (s >= 0 && s < 36)
      out.push_back(kSymbolChars[s]);
    else
      out += "<" + std::to_string(s) + ">";
  }
  if (out.empty()) out = "()";
  return out;
}

Word word_from_string(const std::string& s, int k) {
  if (s == "()") return {};
  Word w;
  w.reserve(s.size());
  for (char c : s) {
    const char* p = std::find(std::begin(kSymbolChars), std::end(kSymbolChars) - 1, c);
    if (p == std::end(kSymbolChars) - 1)
      fail("BadWord", std::string("unknown symbol character '") + c + "'");
    int sym = static_cast<int>(p - std::begin(kSymbolChars));
    if (sym >= k) fail("BadWord", "symbol " + std::to_string(sym) + " outside alphabet");
    w.push_back(sym);
  }
  return w;
}

Word BlockRecode::expand(std::span<const int> block_word) const {
  if (block_word.empty()) return {};
  Word out = letters[block_word[0]];
  for (std::size_t i = 1; i < block_word.size(); ++i)
    out.push_back(letters[block_word[i]].back());
  return out;
}

BlockRecode higher_block_recode(const Sft& s, int r) {
  if (r < 2) fail("BadShape", "block length must be at least 2");
  const WordIndex& letters = s.words(r - 1);
  const int n = letters.count();
  IntMat trans = IntMat::Zero(n, n);
  const IntMat& base = s.transitions();
  for (int i = 0; i < n; ++i) {
    const Word& u = letters.word(i);
    for (int j = 0; j < n; ++j) {
      const Word& v = letters.word(j);
      // u -> v allowed iff they overlap in r-2 symbols and the merged
      // r-word is admissible; the only new pair is (u.back(), v.back())
      bool ok = std::equal(u.begin() + 1, u.end(), v.begin());
      ok = ok && base(u.back(), v.back()) == 1;
      trans(i, j) = ok ? 1 : 0;
    }
  }
  BlockRecode rec{s, Sft::make(n, trans), r, letters.words()};
  return rec;
}

}  // namespace sftkms
