#pragma once

#include <vector>

#include "sftkms/linop.hpp"

namespace sftkms {

/// One spanning term a S^n S*^m b of the isometry algebra.  Scalar multiples
/// are folded into the left factor.
struct StarTerm {
  CylFn left;
  int up = 0;    // power of S
  int down = 0;  // power of S*
  CylFn right;
};

/// Formal sum of spanning terms.  No canonical form is attempted: equality in
/// the underlying algebra is probed only through functionals and through the
/// reduction of products.  Terms with identical (up, down, right) are merged
/// by adding left factors; the empty list is the zero element.
struct StarElem {
  explicit StarElem(Sft s) : sft(std::move(s)) {}

  Sft sft;
  std::vector<StarTerm> terms;

  static StarElem zero(const Sft& s) { return StarElem(s); }
  static StarElem from_fn(const CylFn& a);
  static StarElem isometry(const Sft& s, int n = 1);     // S^n
  static StarElem co_isometry(const Sft& s, int m = 1);  // S*^m
  static StarElem term(const CylFn& a, int up, int down, const CylFn& b);

  StarElem& merge(const StarTerm& t);
};

StarElem star_adjoint(const StarElem& x);

/// Product, reduced termwise with the two-case rule
///   (a S^n S*^m b)(c S^j S*^k d) =
///     a A^n(T^m(bc)) S^{n-m+j} S*^k d          if m <= j,
///     a S^n S*^{m-j+k} A^k(T^j(bc)) d          if m >= j,
/// where A = compose_shift and T = transfer (the m = j tie takes the first
/// branch; both describe the same element).
StarElem star_multiply(const StarElem& x, const StarElem& y);

StarElem operator+(const StarElem& x, const StarElem& y);
StarElem operator*(const StarElem& x, const StarElem& y);
StarElem operator*(Complex c, const StarElem& x);

/// Gauge automorphism for a unitary u in the base algebra: S -> uS.
StarElem gauge_unitary(const StarElem& x, const CylFn& u);

/// Gauge automorphism group sigma_z for the dynamics generated by a strictly
/// positive h: analytic continuation of t -> (S -> h^{it} S).
StarElem gauge_complex(const StarElem& x, Complex z, const CylFn& h);

/// Conditional expectation onto the gauge-fixed part: keeps terms with
/// up == down.
StarElem project_gauge_fixed(const StarElem& x);

bool is_gauge_fixed(const StarElem& x);

/// Conditional expectation onto the base algebra:
/// sum over up == down terms of a * I_n^{-1} * b.
CylFn star_expectation(const StarElem& x);

/// Gauge-fixed star element as a span element (S^n S*^n -> e_n).
SpanElem to_span(const StarElem& x);

/// The quasi-basis redundancy sum_j u_j S S* u_j; multiplying any bS on the
/// left by it reproduces bS.
StarElem quasi_basis_redundancy(const Sft& s);

}  // namespace sftkms
