#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sftkms/measure.hpp"
#include "sftkms/star.hpp"

namespace sftkms {

/// Matrix of f -> transfer(h^{-beta} * ind * f) on depth-d cylinder
/// functions, ind the Watatani index; entrywise this is the classical
/// weighted predecessor sum (Lf)(x) = sum_{theta t = x} h(t)^{-beta} f(t).
/// Requires h real with values > 1 and d >= max(depth(h) - 1, 1).
LinOp ruelle_matrix(const Sft& s, const CylFn& h, double beta, int depth);

struct EigenData {
  double rho = 0.0;       // spectral radius
  RealVec right;          // nonnegative, sums to 1
  RealVec left;           // nonnegative, sums to 1
  double gap = 0.0;       // |lambda_2| / |lambda_1| (1 when degenerate)
  int iterations = 0;
  bool degenerate = false;  // gap within num tolerance of 1
};

/// Perron data of an entrywise nonnegative matrix by power iteration with a
/// fixed uniform start (deterministic).  The subdominant modulus comes from a
/// dense solve for small matrices and from one deflation step otherwise.
EigenData dominant_eigen(const RealMat& m);

struct BowenResult {
  double beta = 0.0;
  double bracket_width = 0.0;
};

/// The unique beta with spectral radius of the depth-1/2 Ruelle matrix equal
/// to 1, by bracketing + bisection; requires a primitive shift and h > 1.
BowenResult bowen_solve(const Sft& s, const CylFn& h);

struct KmsSolution {
  double beta = 0.0;
  CylMeasure measure;       // lives on solve_sft
  double rho_residual = 0.0;
  double eigen_gap = 0.0;
  Sft base_sft;             // the system the problem was posed on
  CylFn h;                  // potential on base_sft
  std::optional<BlockRecode> recode;  // set when depth(h) > 2

  const Sft& solve_sft() const { return measure.sft; }
};

struct NoKmsState {
  double rho = 0.0;
  double beta = 0.0;
};

/// Existence requires |rho - 1| <= settings().num at the given beta; the
/// returned measure is the Markov eigenmeasure of the Ruelle matrix.
/// Potentials deeper than 2 are handled by higher-block recoding.
std::variant<KmsSolution, NoKmsState> kms_measure(const Sft& s, const CylFn& h, double beta);

/// Evaluate the solved state on a base-system function (transports through
/// the recoding when one was needed).
Complex kms_state_eval(const KmsSolution& sol, const CylFn& f);

/// psi = phi o G on the spanning algebra of the base system.
Complex kms_psi(const KmsSolution& sol, const StarElem& x);

/// Transport a base-system cylinder function to the recoded system,
/// preserving all evaluations.
CylFn transport_fn(const BlockRecode& rec, const CylFn& f);

/// Transport a base-system Markov measure to the recoded system.
CylMeasure transport_measure(const BlockRecode& rec, const CylMeasure& m);

struct KmsVerifyReport {
  int samples = 0;
  double max_kms_residual = 0.0;    // |psi(x sigma_{i beta}(y)) - psi(y x)|, relative
  double max_trace_residual = 0.0;  // |psi(xy) - psi(yx)| on gauge-fixed pairs
  double max_iterate_residual = 0.0;  // eigen identity iterates
  double tolerance = 0.0;
  std::string worst_pair;
  bool pass = false;
};

/// Samples spanning pairs (powers <= 4, depths <= 4, values bounded by 10)
/// and checks the KMS identity through the star calculus, the trace property
/// on gauge-fixed pairs, and the transfer iterates of the eigen identity.
/// Throws ResidualExceeded (carrying the worst pair) when the bound fails.
KmsVerifyReport kms_verify(const KmsSolution& sol, int samples, std::uint64_t seed);

struct GroundReport {
  int samples = 0;
  double max_abs_value = 0.0;  // sup over the z grid of |psi_g(x sigma_z(y))|
  double bound = 0.0;          // triangle-inequality bound, uniform in z
  double min_divergence_margin = 0.0;  // min over beta' of phi(h^{beta'}) - c^{beta'}
  bool pass = false;
};

/// Ground-state behavior of psi_g built from phi: boundedness of
/// psi_g(x sigma_z(y)) over a grid with Im z in [0, z_max], and the
/// divergence probe phi(h^{beta'}) >= c^{beta'}.
GroundReport ground_verify(const Sft& s, const CylFn& h, const CylMeasure& phi, int samples,
                           double z_max, int z_grid, std::uint64_t seed,
                           const std::vector<double>& divergence_betas);

/// Vanishing functional of the ground construction: only (0,0) terms
/// contribute, as phi(a b).
Complex ground_functional(const StarElem& x, const CylMeasure& phi);

struct PressureRow {
  double beta = 0.0;
  double rho = 0.0;
  double log_rho = 0.0;
};

/// (beta, rho, log rho) along a grid, sorted by beta.
std::vector<PressureRow> pressure_curve(const Sft& s, const CylFn& h, std::vector<double> betas);

/// Random spanning term generator shared by the verification harnesses.
StarElem random_star_term(const Sft& s, Rng& rng, int max_power, int max_depth,
                          double value_bound);
CylFn random_cyl_fn(const Sft& s, Rng& rng, int max_depth, double value_bound);

}  // namespace sftkms
