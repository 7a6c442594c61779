#pragma once

#include <optional>
#include <span>
#include <utility>

#include "sftkms/sft.hpp"

namespace sftkms {

/// Locally constant function on the path space of an Sft: a depth d plus one
/// complex value per admissible d-word.  Depth 0 is a single constant.
/// Values are immutable after construction; all operations are pure.
class CylFn {
 public:
  CylFn() = default;

  static CylFn constant(const Sft& s, Complex c);
  static CylFn indicator(const Sft& s, std::span<const int> word);
  static CylFn from_values(const Sft& s, int depth, Vec values);

  bool valid() const { return sft_.has_value(); }
  const Sft& sft() const { return *sft_; }
  int depth() const { return depth_; }
  const Vec& values() const { return values_; }

  Complex at(int i) const { return values_[i]; }
  /// Evaluate at a word of length >= depth (prefix lookup).
  Complex eval(std::span<const int> word) const;

 private:
  CylFn(Sft s, int depth, Vec values)
      : sft_(std::move(s)), depth_(depth), values_(std::move(values)) {}

  std::optional<Sft> sft_;
  int depth_ = 0;
  Vec values_;
};

/// Re-express f at a deeper depth; every evaluation is unchanged.
CylFn promote(const CylFn& f, int depth);

CylFn operator+(const CylFn& f, const CylFn& g);
CylFn operator-(const CylFn& f, const CylFn& g);
CylFn operator*(const CylFn& f, const CylFn& g);
CylFn operator*(Complex c, const CylFn& f);
CylFn operator*(const CylFn& f, Complex c);
CylFn operator-(const CylFn& f);

CylFn conj(const CylFn& f);

/// Entrywise transforms.  log/pow require strictly positive real values.
CylFn exp(const CylFn& f);
CylFn log(const CylFn& f);
CylFn pow(const CylFn& f, double p);

/// h^{iz} = exp(iz ln h) for strictly positive real h; at z = i*beta this is
/// the entrywise real power h^{-beta}.
CylFn complex_power(const CylFn& h, Complex z);

/// Entrywise reciprocal; requires |f| bounded away from 0.
CylFn inverse(const CylFn& f);

double sup_norm(const CylFn& f);

/// Largest |f - g| after promotion to common depth.
double max_diff(const CylFn& f, const CylFn& g);
bool approx_equal(const CylFn& f, const CylFn& g, double tol);
bool approx_equal(const CylFn& f, const CylFn& g);  // settings().alg

/// min over words of Re f; requires |Im f| <= tol to be meaningful.
double min_real(const CylFn& f);
double max_imag_abs(const CylFn& f);

/// Checks f is real with values >= bound (strictly if `strict`).
bool entrywise_above(const CylFn& f, double bound, bool strict = false);

/// Promote both operands to a common depth.
std::pair<CylFn, CylFn> align(const CylFn& f, const CylFn& g);

}  // namespace sftkms
