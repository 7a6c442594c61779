#pragma once

#include <vector>

#include "sftkms/cylinder.hpp"

namespace sftkms {

// Calculus of the shift endomorphism and its transfer operator on cylinder
// functions.  Depth bookkeeping is exact: compose_shift adds 1 per step,
// transfer maps depth d to max(d-1, 1), tower_expectation(f, n) lands at
// depth max(depth(f), n+1).

/// f o theta: depth d -> d+1; value at w0..wd is f(w1..wd).
CylFn compose_shift(const CylFn& f);
CylFn compose_shift(const CylFn& f, int n);

/// Number of shift preimages of a point, as a depth-1 function
/// (column sums of the transition matrix).
CylFn predecessor_count(const Sft& s);

/// Sum of f over the shift fiber through each point: depth d -> max(d-1, 1).
CylFn predecessor_sum(const CylFn& f);

/// Transfer operator: predecessor average, predecessor_sum / predecessor_count.
CylFn transfer(const CylFn& f);
CylFn transfer(const CylFn& f, int n);

/// Conditional expectation onto functions of the shifted sequence:
/// compose_shift(transfer(f)); averages f over the fiber through each point.
CylFn expectation(const CylFn& f);

/// n-step expectation tower: compose_shift^n o transfer^n; identity at n = 0.
CylFn tower_expectation(const CylFn& f, int n);

/// True when f factors through theta^n (values constant on theta^n-fibers,
/// i.e. independent of the first n symbols) within tol.
bool factors_through_shift(const CylFn& f, int n, double tol);

/// The g with compose_shift(g, n) == f; errors NotInRange when f does not
/// factor through theta^n within settings().alg.
CylFn factor_section(const CylFn& f, int n);

/// Level-n expectation: conjugate of `expectation` by compose_shift^n.
/// Defined only on the range of compose_shift^n.
CylFn level_expectation(const CylFn& f, int n);

/// Quasi-basis of the expectation: u_i = sqrt(mu * 1_[i at position 0]),
/// depth 2, real nonnegative; reconstructs f = sum_i u_i expectation(u_i f).
std::vector<CylFn> quasi_basis(const Sft& s);

/// Watatani index of the expectation: mu = predecessor_count o theta,
/// depth 2, entrywise >= 1, invertible.
struct IndexData {
  CylFn mu;
  double min_value = 0.0;
};
IndexData watatani_index(const Sft& s);

/// f^[n] = f * (f o theta) * ... * (f o theta^{n-1}); f^[0] = 1.
CylFn cocycle_power(const CylFn& f, int n);

/// I_n = cocycle_power(mu, n); I_0 = 1, depth n+1, strictly positive.
CylFn index_cocycle(const Sft& s, int n);

/// <a, b>_n = tower_expectation(conj(a) * b, n).
CylFn module_inner_product(const CylFn& a, const CylFn& b, int n);

}  // namespace sftkms
