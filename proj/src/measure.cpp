#include "sftkms/measure.hpp"

#include <cmath>

namespace sftkms {

CylMeasure make_markov_measure(const Sft& s, RealVec nu, RealMat kernel) {
  CylMeasure m{s, std::move(nu), std::move(kernel)};
  auto problems = validate_measure(m, 1, settings().num);
  if (!problems.empty()) fail("BadMeasure", problems.front());
  return m;
}

std::vector<std::string> validate_measure(const CylMeasure& m, int max_depth, double tol) {
  std::vector<std::string> out;
  const int k = m.sft.alphabet_size();
  if (m.nu.size() != k || m.kernel.rows() != k || m.kernel.cols() != k) {
    out.push_back("weight/kernel shape does not match the alphabet");
    return out;
  }
  for (int i = 0; i < k; ++i)
    if (m.nu[i] < -tol) out.push_back("negative weight at symbol " + std::to_string(i));
  if (std::abs(m.nu.sum() - 1.0) > tol) out.push_back("weights do not sum to 1");
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (m.kernel(i, j) < -tol)
        out.push_back("negative kernel entry at " + std::to_string(i) + "," + std::to_string(j));
      if (m.sft.transitions()(i, j) == 0 && std::abs(m.kernel(i, j)) > tol)
        out.push_back("kernel charges the forbidden transition " + std::to_string(i) + "->" +
                      std::to_string(j));
    }
    if (m.nu[i] > tol && std::abs(m.kernel.row(i).sum() - 1.0) > tol)
      out.push_back("kernel row " + std::to_string(i) + " does not sum to 1");
  }
  if (!out.empty()) return out;

  // Kolmogorov consistency p_w = sum_t p_{wt}
  for (int d = 1; d < max_depth; ++d) {
    const WordIndex& words = m.sft.words(d);
    for (int i = 0; i < words.count(); ++i) {
      Word w = words.word(i);
      double p = cylinder_weight(m, w);
      double sum = 0.0;
      w.push_back(0);
      for (int t = 0; t < k; ++t) {
        if (m.sft.transitions()(w[w.size() - 2], t) == 0) continue;
        w.back() = t;
        sum += cylinder_weight(m, w);
      }
      if (std::abs(p - sum) > tol) {
        out.push_back("Kolmogorov consistency fails at word " +
                      word_to_string(words.word(i)));
        return out;
      }
    }
  }

  CylFn one = CylFn::constant(m.sft, 1.0);
  if (std::abs(state_eval(m, one) - 1.0) > tol) out.push_back("state_eval(1) != 1");
  return out;
}

double cylinder_weight(const CylMeasure& m, std::span<const int> word) {
  if (word.empty()) return 1.0;
  double p = m.nu[word[0]];
  for (std::size_t i = 0; i + 1 < word.size(); ++i) p *= m.kernel(word[i], word[i + 1]);
  return p;
}

Complex state_eval(const CylMeasure& m, const CylFn& f) {
  if (!m.sft.same_as(f.sft())) fail("SftMismatch", "measure and function live on different shifts");
  const WordIndex& words = m.sft.words(f.depth());
  Complex acc = 0.0;
  for (int i = 0; i < words.count(); ++i)
    acc += cylinder_weight(m, words.word(i)) * f.values()[i];
  return acc;
}

}  // namespace sftkms
