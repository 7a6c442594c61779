#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sftkms {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RealVec = Eigen::VectorXd;
using RealMat = Eigen::MatrixXd;
using IntMat = Eigen::MatrixXi;

/// Error with a stable machine-readable code ("RowDead", "NotPrimitive", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
  throw Error(code, message);
}

/// Global numeric configuration.
///   alg: tolerance for identities that are exact in exact arithmetic.
///   num: tolerance for eigenvalue / iterative results.
///   dim_cap: largest admissible-word count any operation may index.
struct Settings {
  double alg = 1e-12;
  double num = 1e-8;
  int dim_cap = 4096;
};

Settings& settings();

/// Deterministic generator. Each sample stream must be derived from
/// (seed, sample index) so results do not depend on evaluation order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {
    next();  // decorrelate adjacent seeds
    next();
  }

  static Rng for_sample(std::uint64_t seed, std::uint64_t index) {
    return Rng(seed + 0x9e3779b97f4a7c15ULL * (index + 1));
  }

  std::uint64_t next() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int below(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

  /// Uniform on the disc |z| <= radius.
  Complex complex_in_disc(double radius) {
    double r = radius * std::sqrt(uniform());
    double t = 2.0 * 3.14159265358979323846 * uniform();
    return Complex(r * std::cos(t), r * std::sin(t));
  }

 private:
  std::uint64_t state_;
};

}  // namespace sftkms
