#include "sftkms/star.hpp"

namespace sftkms {

namespace {

bool is_zero_fn(const CylFn& f) {
  for (int i = 0; i < f.values().size(); ++i)
    if (f.values()[i] != 0.0) return false;
  return true;
}

}  // namespace

StarElem StarElem::from_fn(const CylFn& a) {
  StarElem out(a.sft());
  out.merge(StarTerm{a, 0, 0, CylFn::constant(a.sft(), 1.0)});
  return out;
}

StarElem StarElem::isometry(const Sft& s, int n) { return term(CylFn::constant(s, 1.0), n, 0, CylFn::constant(s, 1.0)); }

StarElem StarElem::co_isometry(const Sft& s, int m) { return term(CylFn::constant(s, 1.0), 0, m, CylFn::constant(s, 1.0)); }

StarElem StarElem::term(const CylFn& a, int up, int down, const CylFn& b) {
  if (up < 0 || down < 0) fail("BadShape", "negative isometry power");
  StarElem out(a.sft());
  out.merge(StarTerm{a, up, down, b});
  return out;
}

StarElem& StarElem::merge(const StarTerm& t) {
  if (is_zero_fn(t.left) || is_zero_fn(t.right)) return *this;
  for (StarTerm& existing : terms) {
    if (existing.up == t.up && existing.down == t.down && approx_equal(existing.right, t.right)) {
      existing.left = existing.left + t.left;
      if (is_zero_fn(existing.left)) {
        // cancellation; drop the dead term
        existing = terms.back();
        terms.pop_back();
      }
      return *this;
    }
  }
  terms.push_back(t);
  return *this;
}

StarElem star_adjoint(const StarElem& x) {
  StarElem out(x.sft);
  for (const StarTerm& t : x.terms) out.merge(StarTerm{conj(t.right), t.down, t.up, conj(t.left)});
  return out;
}

StarElem star_multiply(const StarElem& x, const StarElem& y) {
  if (!x.sft.same_as(y.sft)) fail("SftMismatch", "operands live on different shifts");
  StarElem out(x.sft);
  for (const StarTerm& s : x.terms) {
    for (const StarTerm& t : y.terms) {
      CylFn mid = s.right * t.left;
      if (s.down <= t.up) {
        CylFn reduced = compose_shift(transfer(mid, s.down), s.up);
        out.merge(StarTerm{s.left * reduced, s.up - s.down + t.up, t.down, t.right});
      } else {
        CylFn reduced = compose_shift(transfer(mid, t.up), t.down);
        out.merge(StarTerm{s.left, s.up, s.down - t.up + t.down, reduced * t.right});
      }
    }
  }
  return out;
}

StarElem operator+(const StarElem& x, const StarElem& y) {
  if (!x.sft.same_as(y.sft)) fail("SftMismatch", "operands live on different shifts");
  StarElem out = x;
  for (const StarTerm& t : y.terms) out.merge(t);
  return out;
}

StarElem operator*(const StarElem& x, const StarElem& y) { return star_multiply(x, y); }

StarElem operator*(Complex c, const StarElem& x) {
  StarElem out(x.sft);
  for (const StarTerm& t : x.terms) out.merge(StarTerm{c * t.left, t.up, t.down, t.right});
  return out;
}

StarElem gauge_unitary(const StarElem& x, const CylFn& u) {
  for (int i = 0; i < u.values().size(); ++i)
    if (std::abs(std::abs(u.values()[i]) - 1.0) > settings().alg)
      fail("NotUnitary", "gauge element must have unit modulus everywhere");
  StarElem out(x.sft);
  for (const StarTerm& t : x.terms) {
    out.merge(StarTerm{t.left * cocycle_power(u, t.up), t.up, t.down,
                       cocycle_power(conj(u), t.down) * t.right});
  }
  return out;
}

StarElem gauge_complex(const StarElem& x, Complex z, const CylFn& h) {
  if (!entrywise_above(h, 0.0, /*strict=*/true))
    fail("NotPositive", "gauge dynamics need a strictly positive h");
  CylFn hz = complex_power(h, z);
  CylFn hz_inv = complex_power(h, -z);
  StarElem out(x.sft);
  for (const StarTerm& t : x.terms) {
    out.merge(StarTerm{t.left * cocycle_power(hz, t.up), t.up, t.down,
                       cocycle_power(hz_inv, t.down) * t.right});
  }
  return out;
}

StarElem project_gauge_fixed(const StarElem& x) {
  StarElem out(x.sft);
  for (const StarTerm& t : x.terms)
    if (t.up == t.down) out.merge(t);
  return out;
}

bool is_gauge_fixed(const StarElem& x) {
  for (const StarTerm& t : x.terms)
    if (t.up != t.down) return false;
  return true;
}

CylFn star_expectation(const StarElem& x) {
  CylFn acc = CylFn::constant(x.sft, 0.0);
  for (const StarTerm& t : x.terms) {
    if (t.up != t.down) continue;
    acc = acc + t.left * inverse(index_cocycle(x.sft, t.up)) * t.right;
  }
  return acc;
}

SpanElem to_span(const StarElem& x) {
  SpanElem out(x.sft);
  for (const StarTerm& t : x.terms) {
    if (t.up != t.down) fail("MixedIndices", "only gauge-fixed elements map to span form");
    out.merge(SpanTerm{t.left, t.up, t.right});
  }
  return out;
}

StarElem quasi_basis_redundancy(const Sft& s) {
  StarElem out(s);
  for (const CylFn& u : quasi_basis(s)) out.merge(StarTerm{u, 1, 1, u});
  return out;
}

}  // namespace sftkms
