#include "sftkms/kms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace sftkms {

namespace {

void require_potential(const CylFn& h) {
  if (!entrywise_above(h, 1.0, /*strict=*/true))
    fail("PotentialNotAboveOne", "the potential must be real with values > 1");
}

/// The system a beta-family of matrices is built on: the base shift, or its
/// higher-block recoding when the potential is deeper than 2.
struct SolveSystem {
  Sft sys;
  CylFn h2;  // potential promoted to depth 2 on sys
  std::optional<BlockRecode> recode;
};

SolveSystem prepare_system(const Sft& s, const CylFn& h) {
  require_potential(h);
  if (h.depth() <= 2) return SolveSystem{s, promote(h, 2), std::nullopt};
  BlockRecode rec = higher_block_recode(s, h.depth());
  CylFn hb = transport_fn(rec, h);
  return SolveSystem{rec.block, promote(hb, 2), std::move(rec)};
}

/// k x k matrix C with C[s][t] = trans(s,t) h(st)^{-beta}; the eigenmeasure
/// weights are its right Perron vector.
RealMat symbol_matrix(const SolveSystem& sys, double beta) {
  const Sft& s = sys.sys;
  const int k = s.alphabet_size();
  const WordIndex& pairs = s.words(2);
  RealMat c = RealMat::Zero(k, k);
  Word w(2);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      if (s.transitions()(a, b) == 0) continue;
      w[0] = a;
      w[1] = b;
      c(a, b) = std::pow(sys.h2.values()[pairs.index_of(w)].real(), -beta);
    }
  }
  return c;
}

double subdominant_by_deflation(const RealMat& m, double rho, const RealVec& right,
                                const RealVec& left) {
  double scale = left.dot(right);
  if (std::abs(scale) < 1e-300) return rho;
  RealMat deflated = m - (rho / scale) * (right * left.transpose());
  RealVec v = RealVec::Ones(m.rows()) / static_cast<double>(m.rows());
  double growth = 0.0;
  for (int i = 0; i < 400; ++i) {
    RealVec w = deflated * v;
    double n = w.cwiseAbs().maxCoeff();
    if (n < 1e-300) return 0.0;
    if (i >= 200) growth += std::log(n);
    v = w / n;
  }
  return std::exp(growth / 200.0);
}

}  // namespace

EigenData dominant_eigen(const RealMat& m) {
  if (m.rows() != m.cols()) fail("BadShape", "matrix must be square");
  if ((m.array() < 0.0).any()) fail("NotNonnegative", "matrix has negative entries");
  const int n = static_cast<int>(m.rows());

  // Iterating m + I instead of m keeps the Perron data unchanged
  // (rho shifts by one, vectors stay) and converges on periodic patterns.
  auto iterate = [&](const RealMat& mat, double& rho, RealVec& vec, int& iters) {
    RealVec v = RealVec::Ones(n) / static_cast<double>(n);
    rho = 0.0;
    const int max_iter = 300000;
    bool settled = false;
    for (iters = 0; iters < max_iter && !settled; ++iters) {
      RealVec w = mat * v + v;
      double s = w.sum();
      if (s <= 1e-300) {
        rho = 0.0;
        vec = v;
        return true;
      }
      w /= s;
      double delta = (w - v).cwiseAbs().maxCoeff();
      double drho = std::abs(s - 1.0 - rho);
      v = w;
      rho = s - 1.0;
      settled = delta < 1e-15 && drho < 1e-14 * std::max(1.0, rho);
    }
    vec = v;
    return settled;
  };

  EigenData out;
  int iters_left = 0;
  double rho_left = 0.0;
  bool ok = iterate(m, out.rho, out.right, out.iterations);
  ok = iterate(m.transpose(), rho_left, out.left, iters_left) && ok;
  out.iterations += iters_left;

  if (n <= 512) {
    // dense spectrum for the subdominant modulus; also repairs rho when the
    // iteration stalls on a defective reducible pattern
    Eigen::EigenSolver<RealMat> solver(m, /*computeEigenvectors=*/false);
    std::vector<double> mods(n);
    for (int i = 0; i < n; ++i) mods[i] = std::abs(solver.eigenvalues()[i]);
    std::sort(mods.begin(), mods.end(), std::greater<double>());
    if (!ok) out.rho = mods[0];
    if (mods[0] > 1e-300)
      out.gap = n > 1 ? mods[1] / mods[0] : 0.0;
    else
      out.gap = 1.0;
  } else {
    if (!ok) fail("ConvergenceFailure", "power iteration did not settle");
    double sub = subdominant_by_deflation(m, out.rho, out.right, out.left);
    out.gap = out.rho > 1e-300 ? std::min(sub / out.rho, 1.0) : 1.0;
  }
  out.degenerate = out.gap >= 1.0 - settings().num;
  return out;
}

LinOp ruelle_matrix(const Sft& s, const CylFn& h, double beta, int depth) {
  require_potential(h);
  const int needed = std::max(h.depth() - 1, 1);
  if (depth < needed)
    fail("DepthTooSmall", "Ruelle matrix needs depth >= " + std::to_string(needed));
  const int k = s.alphabet_size();
  const WordIndex& words = s.words(depth);
  const WordIndex& hw = s.words(h.depth());
  Mat m = Mat::Zero(words.count(), words.count());
  Word t;
  for (int i = 0; i < words.count(); ++i) {
    const Word& x = words.word(i);
    for (int p = 0; p < k; ++p) {
      if (s.transitions()(p, x[0]) == 0) continue;
      t.assign(1, p);
      t.insert(t.end(), x.begin(), x.end());
      std::span<const int> tw(t);
      double hv = h.values()[hw.index_of(tw.subspan(0, h.depth()))].real();
      m(i, words.index_of(tw.subspan(0, depth))) += std::pow(hv, -beta);
    }
  }
  return LinOp{s, depth, depth, std::move(m)};
}

BowenResult bowen_solve(const Sft& s, const CylFn& h) {
  SolveSystem sys = prepare_system(s, h);
  if (!sys.sys.primitive())
    fail("MultiplePerron", "transition matrix is not primitive; the eigenmeasure is ambiguous");
  auto rho_at = [&](double beta) { return dominant_eigen(symbol_matrix(sys, beta)).rho; };

  double rho0 = rho_at(0.0);
  if (rho0 < 1.0 - settings().num)
    fail("NoRoot", "spectral radius below 1 at beta = 0");

  double lo = 0.0, hi = 1.0;
  while (rho_at(hi) >= 1.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) fail("ConvergenceFailure", "could not bracket the Bowen root");
  }
  // strict monotone decrease in beta; bisect to 1e-10
  while (hi - lo > 1e-10) {
    double mid = 0.5 * (lo + hi);
    if (rho_at(mid) >= 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return BowenResult{0.5 * (lo + hi), hi - lo};
}

std::variant<KmsSolution, NoKmsState> kms_measure(const Sft& s, const CylFn& h, double beta) {
  SolveSystem sys = prepare_system(s, h);
  if (!sys.sys.primitive())
    fail("NotPrimitive", "transition matrix is not primitive; the eigenmeasure is ambiguous");

  RealMat c = symbol_matrix(sys, beta);
  EigenData eig = dominant_eigen(c);
  if (std::abs(eig.rho - 1.0) > settings().num) return NoKmsState{eig.rho, beta};

  const int k = sys.sys.alphabet_size();
  RealVec nu = eig.right / eig.right.sum();
  RealMat kernel = RealMat::Zero(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b)
      if (sys.sys.transitions()(a, b) == 1 && nu[a] > 0.0)
        kernel(a, b) = c(a, b) * nu[b] / nu[a];
    // rows sum to rho(beta)/1 up to the solve tolerance; return an exactly
    // stochastic kernel so the measure's own invariants hold to roundoff
    double row = kernel.row(a).sum();
    if (row > 0.0) kernel.row(a) /= row;
  }

  CylMeasure measure = make_markov_measure(sys.sys, std::move(nu), std::move(kernel));
  return KmsSolution{beta,          std::move(measure), std::abs(eig.rho - 1.0),
                     eig.gap,       s,                  h,
                     sys.recode};
}

CylFn transport_fn(const BlockRecode& rec, const CylFn& f) {
  if (!f.sft().same_as(rec.base)) fail("SftMismatch", "function not on the recoded base");
  int block_depth = f.depth() == 0 ? 0 : std::max(f.depth() - rec.r + 2, 1);
  const WordIndex& words = rec.block.words(block_depth);
  Vec v(words.count());
  for (int i = 0; i < words.count(); ++i) {
    Word expanded = rec.expand(words.word(i));
    v[i] = f.eval(expanded);
  }
  return CylFn::from_values(rec.block, block_depth, std::move(v));
}

CylMeasure transport_measure(const BlockRecode& rec, const CylMeasure& m) {
  if (!m.sft.same_as(rec.base)) fail("SftMismatch", "measure not on the recoded base");
  const int n = rec.block.alphabet_size();
  RealVec nu(n);
  for (int i = 0; i < n; ++i) nu[i] = cylinder_weight(m, rec.letters[i]);
  RealMat kernel = RealMat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (rec.block.transitions()(i, j) == 1)
        kernel(i, j) = m.kernel(rec.letters[i].back(), rec.letters[j].back());
  return make_markov_measure(rec.block, std::move(nu), std::move(kernel));
}

Complex kms_state_eval(const KmsSolution& sol, const CylFn& f) {
  if (sol.recode) return state_eval(sol.measure, transport_fn(*sol.recode, f));
  return state_eval(sol.measure, f);
}

Complex kms_psi(const KmsSolution& sol, const StarElem& x) {
  return kms_state_eval(sol, star_expectation(x));
}

CylFn random_cyl_fn(const Sft& s, Rng& rng, int max_depth, double value_bound) {
  int depth = rng.below(max_depth + 1);
  const WordIndex& words = s.words(depth);
  Vec v(words.count());
  for (int i = 0; i < words.count(); ++i) v[i] = rng.complex_in_disc(value_bound);
  return CylFn::from_values(s, depth, std::move(v));
}

StarElem random_star_term(const Sft& s, Rng& rng, int max_power, int max_depth,
                          double value_bound) {
  CylFn a = random_cyl_fn(s, rng, max_depth, value_bound);
  CylFn b = random_cyl_fn(s, rng, max_depth, value_bound);
  int up = rng.below(max_power + 1);
  int down = rng.below(max_power + 1);
  return StarElem::term(a, up, down, b);
}

KmsVerifyReport kms_verify(const KmsSolution& sol, int samples, std::uint64_t seed) {
  const Sft& s = sol.base_sft;
  const CylFn& h = sol.h;
  const Complex i_beta(0.0, sol.beta);

  KmsVerifyReport report;
  report.samples = samples;
  report.tolerance = settings().num;
  const bool scalar_h =
      max_diff(h, CylFn::constant(s, h.values()[0])) <= settings().alg;

  for (int i = 0; i < samples; ++i) {
    Rng rng = Rng::for_sample(seed, static_cast<std::uint64_t>(i));
    StarElem x = random_star_term(s, rng, 4, 4, 10.0);
    StarElem y = random_star_term(s, rng, 4, 4, 10.0);

    Complex lhs = kms_psi(sol, star_multiply(x, gauge_complex(y, i_beta, h)));
    Complex rhs = kms_psi(sol, star_multiply(y, x));
    double residual = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));
    if (residual > report.max_kms_residual) {
      report.max_kms_residual = residual;
      std::ostringstream os;
      os << "sample " << i << ": lhs=" << lhs << ", rhs=" << rhs;
      if (!x.terms.empty() && !y.terms.empty())
        os << ", x=(n=" << x.terms[0].up << ",m=" << x.terms[0].down
           << "), y=(n=" << y.terms[0].up << ",m=" << y.terms[0].down << ")";
      report.worst_pair = os.str();
    }

    // trace property on the fixed-point algebra of the dynamics: for scalar h
    // that algebra is the whole up == down span; otherwise only the base
    // algebra is guaranteed to be fixed
    StarElem xf = scalar_h ? project_gauge_fixed(x) : StarElem::from_fn(random_cyl_fn(s, rng, 4, 10.0));
    StarElem yf = scalar_h ? project_gauge_fixed(y) : StarElem::from_fn(random_cyl_fn(s, rng, 4, 10.0));
    if (!xf.terms.empty() && !yf.terms.empty()) {
      Complex ab = kms_psi(sol, star_multiply(xf, yf));
      Complex ba = kms_psi(sol, star_multiply(yf, xf));
      report.max_trace_residual =
          std::max(report.max_trace_residual, std::abs(ab - ba) / (1.0 + std::abs(ba)));
    }
  }

  // transfer iterates of the eigen identity
  CylFn lambda = pow(h, -sol.beta) * watatani_index(s).mu;
  CylFn lambda_inv = inverse(lambda);
  for (int n = 0; n <= 4; ++n) {
    for (int i = 0; i < std::min(samples, 50); ++i) {
      Rng rng = Rng::for_sample(seed ^ 0x5151515151515151ULL, static_cast<std::uint64_t>(n * 64 + i));
      CylFn a = random_cyl_fn(s, rng, 4, 10.0);
      Complex lhs = kms_state_eval(sol, transfer(a, n));
      Complex rhs = kms_state_eval(sol, cocycle_power(lambda_inv, n) * a);
      report.max_iterate_residual = std::max(report.max_iterate_residual, std::abs(lhs - rhs));
    }
  }

  report.pass = report.max_kms_residual <= report.tolerance &&
                report.max_trace_residual <= report.tolerance;
  if (!report.pass) {
    std::ostringstream os;
    os << "KMS residual " << report.max_kms_residual << ", trace residual "
       << report.max_trace_residual << " beyond tolerance " << report.tolerance
       << "; worst pair: " << report.worst_pair;
    fail("ResidualExceeded", os.str());
  }
  return report;
}

Complex ground_functional(const StarElem& x, const CylMeasure& phi) {
  Complex acc = 0.0;
  for (const StarTerm& t : x.terms) {
    if (t.up != 0 || t.down != 0) continue;
    acc += state_eval(phi, t.left * t.right);
  }
  return acc;
}

GroundReport ground_verify(const Sft& s, const CylFn& h, const CylMeasure& phi, int samples,
                           double z_max, int z_grid, std::uint64_t seed,
                           const std::vector<double>& divergence_betas) {
  require_potential(h);
  GroundReport report;
  report.samples = samples;

  const double re_parts[] = {0.0, 0.7, 1.9};
  for (int i = 0; i < samples; ++i) {
    Rng rng = Rng::for_sample(seed, static_cast<std::uint64_t>(i));
    StarElem x = random_star_term(s, rng, 3, 3, 10.0);
    StarElem y = random_star_term(s, rng, 3, 3, 10.0);
    if (i % 4 == 0) {
      // aligned exponents so the product keeps a scalar corner
      int p = 1 + i % 3;
      x = StarElem::term(random_cyl_fn(s, rng, 3, 10.0), 0, p, random_cyl_fn(s, rng, 3, 10.0));
      y = StarElem::term(random_cyl_fn(s, rng, 3, 10.0), p, 0, random_cyl_fn(s, rng, 3, 10.0));
    }

    double bound = 0.0;
    for (const StarTerm& tx : x.terms)
      for (const StarTerm& ty : y.terms)
        bound += sup_norm(tx.left) * sup_norm(tx.right) * sup_norm(ty.left) * sup_norm(ty.right);
    report.bound = std::max(report.bound, bound);

    for (double re : re_parts) {
      for (int g = 0; g <= z_grid; ++g) {
        Complex z(re, z_max * static_cast<double>(g) / z_grid);
        Complex v = ground_functional(star_multiply(x, gauge_complex(y, z, h)), phi);
        double a = std::abs(v);
        report.max_abs_value = std::max(report.max_abs_value, a);
        if (a > bound + settings().num * (1.0 + bound))
          fail("ResidualExceeded", "ground functional exceeds its analytic bound");
      }
    }
  }

  const double c = min_real(h);
  report.min_divergence_margin = std::numeric_limits<double>::infinity();
  for (double bp : divergence_betas) {
    double lhs = state_eval(phi, pow(h, bp)).real();
    report.min_divergence_margin =
        std::min(report.min_divergence_margin, lhs - std::pow(c, bp));
  }
  report.pass = report.min_divergence_margin >= -settings().num;
  return report;
}

std::vector<PressureRow> pressure_curve(const Sft& s, const CylFn& h, std::vector<double> betas) {
  SolveSystem sys = prepare_system(s, h);
  std::sort(betas.begin(), betas.end());
  std::vector<PressureRow> rows;
  rows.reserve(betas.size());
  for (double beta : betas) {
    double rho = dominant_eigen(symbol_matrix(sys, beta)).rho;
    rows.push_back(PressureRow{beta, rho, std::log(rho)});
  }
  return rows;
}

}  // namespace sftkms
