#pragma once

#include <string>
#include <vector>

#include "sftkms/cylinder.hpp"

namespace sftkms {

/// Markov state on the path space: depth-1 probability weights plus a
/// transition kernel supported on admissible transitions.  Rows of the kernel
/// at symbols of positive weight sum to 1; the cylinder weight of a word is
/// nu[w0] * prod Q[w_i][w_{i+1}].
struct CylMeasure {
  Sft sft;
  RealVec nu;
  RealMat kernel;
};

/// Validating constructor; rejects malformed data.
CylMeasure make_markov_measure(const Sft& s, RealVec nu, RealMat kernel);

/// All invariant violations, empty when the measure is consistent.  Checks
/// weight positivity/normalization, kernel support and row sums, Kolmogorov
/// consistency up to max_depth, and state normalization.
std::vector<std::string> validate_measure(const CylMeasure& m, int max_depth, double tol);

double cylinder_weight(const CylMeasure& m, std::span<const int> word);

/// Linear positive normalized evaluation sum_w p_w f(w) at depth(f).
Complex state_eval(const CylMeasure& m, const CylFn& f);

}  // namespace sftkms
