#pragma once

#include <vector>

#include "sftkms/endo.hpp"

namespace sftkms {

/// Dense operator between spaces of cylinder functions at fixed depths.
/// Rows are indexed by admissible depth_out words, columns by depth_in words.
struct LinOp {
  Sft sft;
  int depth_in = 0;
  int depth_out = 0;
  Mat mat;

  bool square() const { return depth_in == depth_out; }
};

LinOp identity_op(const Sft& s, int depth);

/// Matrix of compose_shift on depth-D functions (D -> D+1).
LinOp compose_shift_matrix(const Sft& s, int depth);

/// Matrix of transfer on depth-D functions (D -> max(D-1, 1)); requires D >= 1.
LinOp transfer_matrix(const Sft& s, int depth);

/// Matrix of tower_expectation(_, n) as an endomorphism of depth-D functions;
/// requires D >= n+1.
LinOp basic_projection(const Sft& s, int n, int depth);

/// Multiplication by g on depth-D functions; requires depth(g) <= D.
LinOp multiplication_op(const CylFn& g, int depth);

/// Raise one level in the operator tower: T on depth-D functions maps to
/// compose_shift_matrix * T * transfer_matrix on depth-(D+1) functions.
LinOp raise_operator(const LinOp& t);

LinOp compose(const LinOp& a, const LinOp& b);
LinOp operator*(const LinOp& a, const LinOp& b);
LinOp operator+(const LinOp& a, const LinOp& b);
LinOp operator-(const LinOp& a, const LinOp& b);

CylFn apply(const LinOp& t, const CylFn& f);

double max_abs(const LinOp& t);  // largest |entry|

/// One spanning term a . e_n . b of the tower algebra (e_n the basic
/// projection at level n).
struct SpanTerm {
  CylFn left;
  int level = 0;
  CylFn right;
};

/// Formal sum of spanning terms.  Products reduce with the basic-projection
/// relations; terms with equal (level, right) merge by adding left factors.
/// The empty term list is the zero element.
struct SpanElem {
  explicit SpanElem(Sft s) : sft(std::move(s)) {}

  Sft sft;
  std::vector<SpanTerm> terms;

  static SpanElem from_fn(const CylFn& a);  // a . e_0 . 1
  static SpanElem projection(const Sft& s, int level);

  SpanElem& merge(const SpanTerm& t);
};

SpanElem span_adjoint(const SpanElem& x);
SpanElem span_product(const SpanElem& x, const SpanElem& y);
SpanElem operator+(const SpanElem& x, const SpanElem& y);
SpanElem operator*(const SpanElem& x, const SpanElem& y);

/// Expectation to the base algebra on a uniform-level element:
/// sum of a * I_n^{-1} * b over terms; errors MixedIndices if levels differ.
CylFn span_expectation_level(const SpanElem& x);

/// Termwise expectation to the base algebra (levels may be mixed).
CylFn span_expectation(const SpanElem& x);

/// Realize a span element as a dense operator on depth-D functions.
LinOp span_to_operator(const SpanElem& x, int depth);

/// Residual of e_n = sum_i M_{a^n(u_i)} e_{n+1} M_{a^n(u_i)} at depth D
/// (quasi-basis expansion of the basic projection); requires D >= n+2.
double projection_expansion_residual(const Sft& s, int n, int depth);

}  // namespace sftkms
