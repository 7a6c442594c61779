#include "sftkms/endo.hpp"

#include <cmath>

namespace sftkms {

CylFn compose_shift(const CylFn& f) {
  const Sft& s = f.sft();
  const int d = f.depth();
  const WordIndex& from = s.words(d);
  const WordIndex& to = s.words(d + 1);
  Vec v(to.count());
  for (int i = 0; i < to.count(); ++i) {
    std::span<const int> w(to.word(i));
    v[i] = f.values()[from.index_of(w.subspan(1, d))];
  }
  return CylFn::from_values(s, d + 1, std::move(v));
}

CylFn compose_shift(const CylFn& f, int n) {
  if (n < 0) fail("BadShape", "negative shift power");
  CylFn g = f;
  for (int i = 0; i < n; ++i) g = compose_shift(g);
  return g;
}

CylFn predecessor_count(const Sft& s) {
  const int k = s.alphabet_size();
  Vec v(k);
  for (int t = 0; t < k; ++t) v[t] = static_cast<double>(s.transitions().col(t).sum());
  return CylFn::from_values(s, 1, std::move(v));
}

CylFn predecessor_sum(const CylFn& f) {
  const Sft& s = f.sft();
  const int k = s.alphabet_size();
  const int d = f.depth();
  const int d_out = std::max(d - 1, 1);
  const WordIndex& from = s.words(d);
  const WordIndex& to = s.words(d_out);
  Vec v = Vec::Zero(to.count());
  Word t;
  for (int i = 0; i < to.count(); ++i) {
    const Word& x = to.word(i);
    for (int p = 0; p < k; ++p) {
      if (s.transitions()(p, x[0]) == 0) continue;
      t.assign(1, p);
      t.insert(t.end(), x.begin(), x.end());
      std::span<const int> tw(t);
      v[i] += f.values()[from.index_of(tw.subspan(0, d))];
    }
  }
  return CylFn::from_values(s, d_out, std::move(v));
}

CylFn transfer(const CylFn& f) {
  CylFn sum = predecessor_sum(f);
  CylFn n = promote(predecessor_count(f.sft()), sum.depth());
  Vec v = sum.values().cwiseQuotient(n.values());
  return CylFn::from_values(f.sft(), sum.depth(), std::move(v));
}

CylFn transfer(const CylFn& f, int n) {
  if (n < 0) fail("BadShape", "negative transfer power");
  CylFn g = f;
  for (int i = 0; i < n; ++i) g = transfer(g);
  return g;
}

CylFn expectation(const CylFn& f) { return compose_shift(transfer(f)); }

CylFn tower_expectation(const CylFn& f, int n) {
  if (n < 0) fail("BadShape", "negative tower level");
  if (n == 0) return f;
  return compose_shift(transfer(f, n), n);
}

namespace {

CylFn factor_section_unchecked(const CylFn& f, int n) {
  const Sft& s = f.sft();
  const int d = f.depth();
  const int d_out = std::max(d - n, 0);
  const WordIndex& from = s.words(d);
  const WordIndex& to = s.words(d_out);
  // one admissible backward extension per target word; symbols have
  // predecessors because no transition column is zero
  Vec v(to.count());
  for (int i = 0; i < to.count(); ++i) {
    Word w = to.word(i);
    for (int step = 0; step < n && static_cast<int>(w.size()) < d; ++step) {
      int head = w.empty() ? -1 : w.front();
      int pred = 0;
      if (head >= 0) {
        while (s.transitions()(pred, head) == 0) ++pred;
      }
      w.insert(w.begin(), pred);
    }
    std::span<const int> ws(w);
    v[i] = f.values()[from.index_of(ws.subspan(0, std::min<std::size_t>(d, ws.size())))];
  }
  return CylFn::from_values(s, d_out, std::move(v));
}

}  // namespace

bool factors_through_shift(const CylFn& f, int n, double tol) {
  if (n == 0) return true;
  const int d = f.depth();
  if (d <= n) {
    // must be constant
    double lo_re = f.values().real().minCoeff(), hi_re = f.values().real().maxCoeff();
    double lo_im = f.values().imag().minCoeff(), hi_im = f.values().imag().maxCoeff();
    return std::max(hi_re - lo_re, hi_im - lo_im) <= tol;
  }
  CylFn g = factor_section_unchecked(f, n);
  return max_diff(f, compose_shift(g, n)) <= tol;
}

CylFn factor_section(const CylFn& f, int n) {
  if (n < 0) fail("BadShape", "negative shift power");
  if (n == 0) return f;
  CylFn g = factor_section_unchecked(f, n);
  if (max_diff(f, compose_shift(g, n)) > settings().alg)
    fail("NotInRange", "function does not factor through theta^" + std::to_string(n));
  return g;
}

CylFn level_expectation(const CylFn& f, int n) {
  return compose_shift(expectation(factor_section(f, n)), n);
}

std::vector<CylFn> quasi_basis(const Sft& s) {
  CylFn mu = watatani_index(s).mu;
  std::vector<CylFn> basis;
  basis.reserve(s.alphabet_size());
  for (int i = 0; i < s.alphabet_size(); ++i) {
    Word w{i};
    CylFn masked = mu * promote(CylFn::indicator(s, w), 2);
    Vec v(masked.values().size());
    for (int j = 0; j < v.size(); ++j) v[j] = std::sqrt(std::max(masked.values()[j].real(), 0.0));
    basis.push_back(CylFn::from_values(s, 2, std::move(v)));
  }
  return basis;
}

IndexData watatani_index(const Sft& s) {
  CylFn mu = compose_shift(predecessor_count(s));
  return IndexData{mu, min_real(mu)};
}

CylFn cocycle_power(const CylFn& f, int n) {
  if (n < 0) fail("BadShape", "negative cocycle power");
  if (n == 0) return CylFn::constant(f.sft(), 1.0);
  CylFn acc = f;
  CylFn shifted = f;
  for (int i = 1; i < n; ++i) {
    shifted = compose_shift(shifted);
    acc = acc * shifted;
  }
  return acc;
}

CylFn index_cocycle(const Sft& s, int n) {
  return cocycle_power(watatani_index(s).mu, n);
}

CylFn module_inner_product(const CylFn& a, const CylFn& b, int n) {
  return tower_expectation(conj(a) * b, n);
}

}  // namespace sftkms
