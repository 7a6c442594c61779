#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "sftkms/common.hpp"

namespace sftkms {

using Word = std::vector<int>;

/// All admissible words of one depth, in lexicographic order, with reverse lookup.
class WordIndex {
 public:
  WordIndex(const IntMat& trans, int depth);

  int depth() const { return depth_; }
  int count() const { return static_cast<int>(words_.size()); }
  const Word& word(int i) const { return words_[i]; }
  const std::vector<Word>& words() const { return words_; }

  /// Position of an admissible word, -1 if not admissible.
  int find(std::span<const int> w) const;
  int index_of(std::span<const int> w) const;  // throws BadWord if absent

 private:
  int depth_;
  std::vector<Word> words_;
};

/// One-sided subshift of finite type: alphabet {0..k-1} and a 0/1 transition
/// matrix; trans(s, t) = 1 iff the word "st" is admissible.  The left shift
/// acts on the path space; validity requires the shift to be surjective
/// (no zero column) and the space nonempty along every symbol (no zero row).
class Sft {
 public:
  static Sft make(int k, const IntMat& trans);

  int alphabet_size() const { return data_->k; }
  const IntMat& transitions() const { return data_->trans; }
  bool primitive() const { return data_->primitive; }

  /// Memoized admissible-word table at a depth.  Depth 0 holds the empty word.
  const WordIndex& words(int depth) const;

  /// Structural identity (same alphabet + transitions).
  bool same_as(const Sft& other) const;

  bool operator==(const Sft& other) const { return same_as(other); }

 private:
  struct Data {
    int k = 0;
    IntMat trans;
    bool primitive = false;
    mutable std::mutex mutex;
    mutable std::map<int, std::unique_ptr<WordIndex>> cache;
  };

  explicit Sft(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

bool is_primitive(const IntMat& trans);

std::string word_to_string(std::span<const int> w);
Word word_from_string(const std::string& s, int k);

/// Higher-block recoding: the alphabet of the recoded shift is the set of
/// admissible (r-1)-words of the base shift; a block word of length d stands
/// for the base word of length d + r - 2 obtained by overlapping its letters.
struct BlockRecode {
  Sft base;
  Sft block;
  int r = 2;
  std::vector<Word> letters;  // block symbol -> base (r-1)-word

  Word expand(std::span<const int> block_word) const;
};

BlockRecode higher_block_recode(const Sft& s, int r);

}  // namespace sftkms
