#include "sftkms/linop.hpp"

#include <algorithm>

namespace sftkms {

namespace {

void check_same_sft(const Sft& a, const Sft& b) {
  if (!a.same_as(b)) fail("SftMismatch", "operands live on different shifts");
}

}  // namespace

LinOp identity_op(const Sft& s, int depth) {
  int n = s.words(depth).count();
  return LinOp{s, depth, depth, Mat::Identity(n, n)};
}

LinOp compose_shift_matrix(const Sft& s, int depth) {
  const WordIndex& from = s.words(depth);
  const WordIndex& to = s.words(depth + 1);
  Mat m = Mat::Zero(to.count(), from.count());
  for (int i = 0; i < to.count(); ++i) {
    std::span<const int> w(to.word(i));
    m(i, from.index_of(w.subspan(1, depth))) = 1.0;
  }
  return LinOp{s, depth, depth + 1, std::move(m)};
}

LinOp transfer_matrix(const Sft& s, int depth) {
  if (depth < 1) fail("DepthTooSmall", "transfer matrix needs depth >= 1");
  const int k = s.alphabet_size();
  const int d_out = std::max(depth - 1, 1);
  const WordIndex& from = s.words(depth);
  const WordIndex& to = s.words(d_out);
  CylFn count = predecessor_count(s);
  Mat m = Mat::Zero(to.count(), from.count());
  Word t;
  for (int i = 0; i < to.count(); ++i) {
    const Word& x = to.word(i);
    const double weight = 1.0 / count.values()[x[0]].real();
    for (int p = 0; p < k; ++p) {
      if (s.transitions()(p, x[0]) == 0) continue;
      t.assign(1, p);
      t.insert(t.end(), x.begin(), x.end());
      std::span<const int> tw(t);
      m(i, from.index_of(tw.subspan(0, depth))) += weight;
    }
  }
  return LinOp{s, depth, d_out, std::move(m)};
}

LinOp basic_projection(const Sft& s, int n, int depth) {
  if (n < 0) fail("BadShape", "negative projection level");
  if (depth < n + 1 && n > 0)
    fail("DepthTooSmall", "basic projection at level " + std::to_string(n) +
                              " needs depth >= " + std::to_string(n + 1));
  LinOp acc = identity_op(s, depth);
  for (int i = 0; i < n; ++i) acc = transfer_matrix(s, depth - i) * acc;
  for (int i = 0; i < n; ++i) acc = compose_shift_matrix(s, depth - n + i) * acc;
  return acc;
}

LinOp multiplication_op(const CylFn& g, int depth) {
  if (g.depth() > depth) fail("DepthMismatch", "multiplier deeper than operator depth");
  CylFn gp = promote(g, depth);
  return LinOp{g.sft(), depth, depth, gp.values().asDiagonal()};
}

LinOp raise_operator(const LinOp& t) {
  if (!t.square()) fail("DepthMismatch", "raise_operator needs a square operator");
  return compose_shift_matrix(t.sft, t.depth_out) * t * transfer_matrix(t.sft, t.depth_in + 1);
}

LinOp compose(const LinOp& a, const LinOp& b) {
  check_same_sft(a.sft, b.sft);
  if (a.depth_in != b.depth_out) fail("DepthMismatch", "operator depths do not chain");
  return LinOp{a.sft, b.depth_in, a.depth_out, a.mat * b.mat};
}

LinOp operator*(const LinOp& a, const LinOp& b) { return compose(a, b); }

LinOp operator+(const LinOp& a, const LinOp& b) {
  check_same_sft(a.sft, b.sft);
  if (a.depth_in != b.depth_in || a.depth_out != b.depth_out)
    fail("DepthMismatch", "operator shapes differ");
  return LinOp{a.sft, a.depth_in, a.depth_out, a.mat + b.mat};
}

LinOp operator-(const LinOp& a, const LinOp& b) {
  check_same_sft(a.sft, b.sft);
  if (a.depth_in != b.depth_in || a.depth_out != b.depth_out)
    fail("DepthMismatch", "operator shapes differ");
  return LinOp{a.sft, a.depth_in, a.depth_out, a.mat - b.mat};
}

CylFn apply(const LinOp& t, const CylFn& f) {
  check_same_sft(t.sft, f.sft());
  if (f.depth() > t.depth_in) fail("DepthMismatch", "function deeper than operator input");
  CylFn fp = promote(f, t.depth_in);
  return CylFn::from_values(t.sft, t.depth_out, t.mat * fp.values());
}

double max_abs(const LinOp& t) { return t.mat.cwiseAbs().maxCoeff(); }

SpanElem SpanElem::from_fn(const CylFn& a) {
  SpanElem out(a.sft());
  out.merge(SpanTerm{a, 0, CylFn::constant(a.sft(), 1.0)});
  return out;
}

SpanElem SpanElem::projection(const Sft& s, int level) {
  CylFn one = CylFn::constant(s, 1.0);
  SpanElem out(s);
  out.merge(SpanTerm{one, level, one});
  return out;
}

namespace {

bool is_zero_fn(const CylFn& f) {
  for (int i = 0; i < f.values().size(); ++i)
    if (f.values()[i] != 0.0) return false;
  return true;
}

}  // namespace

SpanElem& SpanElem::merge(const SpanTerm& t) {
  if (is_zero_fn(t.left) || is_zero_fn(t.right)) return *this;
  // terms at one level combine only when both factors coincide
  for (SpanTerm& existing : terms) {
    if (existing.level == t.level && approx_equal(existing.left, t.left) &&
        approx_equal(existing.right, t.right)) {
      existing.left = existing.left + t.left;
      return *this;
    }
  }
  terms.push_back(t);
  return *this;
}

SpanElem span_adjoint(const SpanElem& x) {
  SpanElem out(x.sft);
  for (const SpanTerm& t : x.terms) out.merge(SpanTerm{conj(t.right), t.level, conj(t.left)});
  return out;
}

SpanElem span_product(const SpanElem& x, const SpanElem& y) {
  check_same_sft(x.sft, y.sft);
  SpanElem out(x.sft);
  for (const SpanTerm& s : x.terms) {
    for (const SpanTerm& t : y.terms) {
      CylFn mid = s.right * t.left;
      if (s.level <= t.level) {
        // (a e_n b)(c e_m d) = a E_n(bc) e_m d for n <= m
        out.merge(SpanTerm{s.left * tower_expectation(mid, s.level), t.level, t.right});
      } else {
        // adjoint of the rule above: a e_n E_m(bc) d for n >= m
        out.merge(SpanTerm{s.left, s.level, tower_expectation(mid, t.level) * t.right});
      }
    }
  }
  return out;
}

SpanElem operator+(const SpanElem& x, const SpanElem& y) {
  SpanElem out = x;
  for (const SpanTerm& t : y.terms) out.merge(t);
  return out;
}

SpanElem operator*(const SpanElem& x, const SpanElem& y) { return span_product(x, y); }

CylFn span_expectation_level(const SpanElem& x) {
  const Sft& s = x.sft;
  if (x.terms.empty()) return CylFn::constant(s, 0.0);
  int level = x.terms.front().level;
  for (const SpanTerm& t : x.terms)
    if (t.level != level) fail("MixedIndices", "element mixes projection levels");
  CylFn inv_cocycle = inverse(index_cocycle(s, level));
  CylFn acc = CylFn::constant(s, 0.0);
  for (const SpanTerm& t : x.terms) acc = acc + t.left * inv_cocycle * t.right;
  return acc;
}

CylFn span_expectation(const SpanElem& x) {
  const Sft& s = x.sft;
  CylFn acc = CylFn::constant(s, 0.0);
  for (const SpanTerm& t : x.terms)
    acc = acc + t.left * inverse(index_cocycle(s, t.level)) * t.right;
  return acc;
}

LinOp span_to_operator(const SpanElem& x, int depth) {
  const Sft& s = x.sft;
  int n = s.words(depth).count();
  LinOp acc{s, depth, depth, Mat::Zero(n, n)};
  for (const SpanTerm& t : x.terms) {
    acc = acc + multiplication_op(t.left, depth) * basic_projection(s, t.level, depth) *
                    multiplication_op(t.right, depth);
  }
  return acc;
}

double projection_expansion_residual(const Sft& s, int n, int depth) {
  if (depth < n + 2)
    fail("DepthTooSmall", "expansion residual needs depth >= level + 2");
  LinOp lhs = basic_projection(s, n, depth);
  LinOp rhs{s, depth, depth, Mat::Zero(lhs.mat.rows(), lhs.mat.cols())};
  for (const CylFn& u : quasi_basis(s)) {
    CylFn shifted = compose_shift(u, n);
    rhs = rhs + multiplication_op(shifted, depth) * basic_projection(s, n + 1, depth) *
                    multiplication_op(conj(shifted), depth);
  }
  return max_abs(lhs - rhs);
}

}  // namespace sftkms
