#include <doctest.h>

#include "sftkms/kms.hpp"

using namespace sftkms;

namespace {

Sft full_shift() {
  IntMat t(2, 2);
  t << 1, 1, 1, 1;
  return Sft::make(2, t);
}

Sft golden_mean() {
  IntMat t(2, 2);
  t << 1, 1, 1, 0;
  return Sft::make(2, t);
}

CylFn sample_fn(const Sft& s, int depth, std::uint64_t seed) {
  Rng rng(seed);
  const WordIndex& words = s.words(depth);
  Vec v(words.count());
  for (int i = 0; i < words.count(); ++i) v[i] = rng.complex_in_disc(1.0);
  return CylFn::from_values(s, depth, std::move(v));
}

bool single_term(const StarElem& x, int up, int down) {
  return x.terms.size() == 1 && x.terms[0].up == up && x.terms[0].down == down;
}

}  // namespace

TEST_CASE("adjoints swap the exponents") {
  Sft f = full_shift();
  CylFn one = CylFn::constant(f, 1.0);

  StarElem s_adj = star_adjoint(StarElem::isometry(f));
  CHECK(single_term(s_adj, 0, 1));

  CylFn a = pow(sample_fn(f, 1, 2) * conj(sample_fn(f, 1, 2)) + CylFn::constant(f, 0.1), 0.5);
  StarElem self = StarElem::term(a, 2, 2, a);
  StarElem self_adj = star_adjoint(self);
  CHECK(single_term(self_adj, 2, 2));
  CHECK(max_diff(self_adj.terms[0].left, a) == 0.0);
  CHECK(max_diff(self_adj.terms[0].right, a) == 0.0);

  CylFn b = sample_fn(f, 2, 5);
  StarElem t = star_adjoint(StarElem::term(one, 1, 2, b));
  CHECK(single_term(t, 2, 1));
  CHECK(max_diff(t.terms[0].left, conj(b)) == 0.0);

  // involution and anti-multiplicativity
  Rng rng(9);
  StarElem x = random_star_term(f, rng, 3, 2, 1.0);
  StarElem y = random_star_term(f, rng, 3, 2, 1.0);
  StarElem xy_adj = star_adjoint(star_multiply(x, y));
  StarElem yx = star_multiply(star_adjoint(y), star_adjoint(x));
  REQUIRE(xy_adj.terms.size() == 1);
  REQUIRE(yx.terms.size() == 1);
  CHECK(xy_adj.terms[0].up == yx.terms[0].up);
  CHECK(xy_adj.terms[0].down == yx.terms[0].down);
  CHECK(max_diff(star_adjoint(star_adjoint(x)).terms[0].left, x.terms[0].left) == 0.0);
}

TEST_CASE("products follow the two-case reduction") {
  Sft f = full_shift();
  Sft g = golden_mean();
  CylFn one_f = CylFn::constant(f, 1.0);

  // S* S = 1
  StarElem unit = star_multiply(StarElem::co_isometry(f), StarElem::isometry(f));
  CHECK(single_term(unit, 0, 0));
  CHECK(max_diff(unit.terms[0].left, one_f) < 1e-15);

  // SS* is idempotent
  StarElem range_proj = star_multiply(StarElem::isometry(f), StarElem::co_isometry(f));
  StarElem twice = star_multiply(range_proj, range_proj);
  CHECK(single_term(twice, 1, 1));
  CHECK(max_diff(twice.terms[0].left * twice.terms[0].right, one_f) < 1e-15);

  // transfer appears when the co-isometry meets a weighted isometry
  Vec hv(2);
  hv << 2.0, 3.0;
  CylFn h = CylFn::from_values(f, 1, hv);
  StarElem reduced = star_multiply(StarElem::co_isometry(f),
                                   StarElem::term(h, 1, 0, one_f));
  CHECK(single_term(reduced, 0, 0));
  CHECK(approx_equal(reduced.terms[0].left * reduced.terms[0].right,
                     CylFn::constant(f, 2.5)));

  // covariance on both sides
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CylFn a = sample_fn(g, 3, seed + 100);
    StarElem lhs = star_multiply(StarElem::isometry(g), StarElem::from_fn(a));
    CHECK(single_term(lhs, 1, 0));
    CHECK(max_diff(lhs.terms[0].left, compose_shift(a)) < 1e-15);

    StarElem mid = star_multiply(StarElem::co_isometry(g), StarElem::from_fn(a));
    StarElem rhs = star_multiply(mid, StarElem::isometry(g));
    CHECK(single_term(rhs, 0, 0));
    CHECK(max_diff(rhs.terms[0].left * rhs.terms[0].right, transfer(a)) < 1e-14);
  }

  // both reduction branches agree at a tie, through the base expectation
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed + 333);
    CylFn a = sample_fn(g, 3, seed), b = sample_fn(g, 3, seed + 1);
    CylFn c = sample_fn(g, 3, seed + 2), d = sample_fn(g, 3, seed + 3);
    int n = rng.below(4), m = rng.below(4), k = rng.below(4);
    CylFn mid = b * c;
    StarElem first = StarElem::term(a * compose_shift(transfer(mid, m), n), n, k, d);
    StarElem second = StarElem::term(a, n, k, compose_shift(transfer(mid, m), k) * d);
    CHECK(max_diff(star_expectation(first), star_expectation(second)) < 1e-13);
    StarElem prod = star_multiply(StarElem::term(a, n, m, b), StarElem::term(c, m, k, d));
    CHECK(single_term(prod, n, k));
    CHECK(max_diff(prod.terms[0].left, first.terms[0].left) < 1e-14);
  }

  // associativity on random triples
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Rng rng(seed + 777);
    StarElem x = random_star_term(g, rng, 4, 3, 1.0);
    StarElem y = random_star_term(g, rng, 4, 3, 1.0);
    StarElem z = random_star_term(g, rng, 4, 3, 1.0);
    StarElem l = star_multiply(star_multiply(x, y), z);
    StarElem r = star_multiply(x, star_multiply(y, z));
    REQUIRE(l.terms.size() == 1);
    REQUIRE(r.terms.size() == 1);
    CHECK(l.terms[0].up == r.terms[0].up);
    CHECK(l.terms[0].down == r.terms[0].down);
    CHECK(max_diff(star_expectation(l), star_expectation(r)) < 1e-13);
  }
}

TEST_CASE("sums merge compatible terms only") {
  Sft f = full_shift();
  CylFn one = CylFn::constant(f, 1.0);
  StarElem two_units = StarElem::from_fn(one) + StarElem::from_fn(one);
  REQUIRE(two_units.terms.size() == 1);
  CHECK(max_diff(two_units.terms[0].left, CylFn::constant(f, 2.0)) == 0.0);

  StarElem mixed = StarElem::isometry(f) + StarElem::co_isometry(f);
  CHECK(mixed.terms.size() == 2);

  // cancellation drops the term
  StarElem zero = StarElem::isometry(f) + (Complex(-1.0) * StarElem::isometry(f));
  CHECK(zero.terms.empty());
}

TEST_CASE("unitary gauge automorphisms") {
  Sft f = full_shift();
  Rng rng(21);
  StarElem x = random_star_term(f, rng, 3, 2, 1.0) + random_star_term(f, rng, 3, 2, 1.0);

  // trivial unitary
  StarElem same = gauge_unitary(x, CylFn::constant(f, 1.0));
  REQUIRE(same.terms.size() == x.terms.size());
  for (std::size_t i = 0; i < x.terms.size(); ++i)
    CHECK(max_diff(same.terms[i].left, x.terms[i].left) == 0.0);

  // scalar unitary scales by z^{n-m}
  Complex z = std::polar(1.0, 0.7);
  StarElem scaled = gauge_unitary(StarElem::term(CylFn::constant(f, 1.0), 2, 1,
                                                 CylFn::constant(f, 1.0)),
                                  CylFn::constant(f, z));
  REQUIRE(scaled.terms.size() == 1);
  CHECK(std::abs(scaled.terms[0].left.values()[0] * scaled.terms[0].right.values()[0] -
                 z * z * std::conj(z)) < 1e-15);

  // inverse gauge undoes
  CylFn u = exp(Complex(0, 1) * pow(conj(sample_fn(f, 1, 3)) * sample_fn(f, 1, 3) +
                                        CylFn::constant(f, 0.2),
                                    0.5));
  StarElem round = gauge_unitary(gauge_unitary(x, u), conj(u));
  REQUIRE(round.terms.size() == x.terms.size());
  for (std::size_t i = 0; i < x.terms.size(); ++i) {
    CHECK(max_diff(round.terms[i].left, x.terms[i].left) < 1e-14);
    CHECK(max_diff(round.terms[i].right, x.terms[i].right) < 1e-14);
  }

  CHECK_THROWS_WITH_AS(gauge_unitary(x, CylFn::constant(f, 2.0)),
                       doctest::Contains("NotUnitary"), Error);
}

TEST_CASE("analytic gauge continuation") {
  Sft f = full_shift();
  const double e = std::exp(1.0);
  CylFn h = CylFn::constant(f, e);
  Rng rng(31);
  StarElem x = random_star_term(f, rng, 3, 2, 1.0);

  StarElem id = gauge_complex(x, 0.0, h);
  CHECK(max_diff(id.terms[0].left, x.terms[0].left) == 0.0);

  // at z = i beta the isometry scales by e^{-beta}
  double beta = 0.8;
  StarElem scaled = gauge_complex(StarElem::isometry(f), Complex(0, beta), h);
  REQUIRE(single_term(scaled, 1, 0));
  CHECK(max_diff(scaled.terms[0].left, CylFn::constant(f, std::exp(-beta))) < 1e-15);

  // base algebra is fixed
  CylFn a = sample_fn(f, 2, 41);
  StarElem fixed = gauge_complex(StarElem::from_fn(a), Complex(0, beta), h);
  CHECK(max_diff(fixed.terms[0].left, a) < 1e-15);

  // group law for a nonconstant positive potential
  Vec hv(2);
  hv << 1.5, 4.0;
  CylFn h1 = CylFn::from_values(f, 1, hv);
  Complex z1(0.3, 0.4), z2(-1.1, 0.2);
  StarElem lhs = gauge_complex(gauge_complex(x, z1, h1), z2, h1);
  StarElem rhs = gauge_complex(x, z1 + z2, h1);
  REQUIRE(lhs.terms.size() == rhs.terms.size());
  for (std::size_t i = 0; i < lhs.terms.size(); ++i) {
    CHECK(max_diff(lhs.terms[i].left, rhs.terms[i].left) < 1e-13);
    CHECK(max_diff(lhs.terms[i].right, rhs.terms[i].right) < 1e-13);
  }

  CHECK_THROWS_WITH_AS(gauge_complex(x, z1, CylFn::constant(f, -1.0)),
                       doctest::Contains("NotPositive"), Error);
}

TEST_CASE("projection onto the gauge-fixed part") {
  Sft f = full_shift();
  CHECK(project_gauge_fixed(StarElem::isometry(f)).terms.empty());

  CylFn a = sample_fn(f, 2, 51), b = sample_fn(f, 2, 52);
  StarElem diag = StarElem::term(a, 1, 1, b);
  StarElem kept = project_gauge_fixed(diag);
  REQUIRE(kept.terms.size() == 1);
  CHECK(max_diff(kept.terms[0].left, a) == 0.0);

  StarElem mixed = diag + StarElem::isometry(f, 2);
  StarElem projected = project_gauge_fixed(mixed);
  REQUIRE(projected.terms.size() == 1);
  CHECK(projected.terms[0].up == 1);
  CHECK(is_gauge_fixed(projected));
  CHECK_FALSE(is_gauge_fixed(mixed));

  // idempotent, and a bimodule map over the base algebra
  StarElem again = project_gauge_fixed(projected);
  CHECK(again.terms.size() == projected.terms.size());
  CylFn c = sample_fn(f, 1, 53);
  StarElem left = star_multiply(StarElem::from_fn(c), mixed);
  CHECK(max_diff(star_expectation(project_gauge_fixed(left)),
                 c * star_expectation(projected)) < 1e-14);
}

TEST_CASE("expectation onto the base algebra") {
  Sft f = full_shift();
  Sft g = golden_mean();
  CylFn one_f = CylFn::constant(f, 1.0);

  // diagonal powers of the isometry
  StarElem s2 = StarElem::term(one_f, 2, 2, one_f);
  CHECK(approx_equal(star_expectation(s2), CylFn::constant(f, 0.25)));
  CHECK(sup_norm(star_expectation(StarElem::isometry(f))) == 0.0);

  Vec hv(2);
  hv << 2.0, 3.0;
  CylFn h = CylFn::from_values(f, 1, hv);
  StarElem weighted = StarElem::term(h, 1, 1, one_f);
  CHECK(max_diff(star_expectation(weighted), 0.5 * h) < 1e-15);

  // identity on the base algebra
  CylFn a = sample_fn(g, 3, 61);
  CHECK(max_diff(star_expectation(StarElem::from_fn(a)), a) == 0.0);

  // positivity samples
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed + 1000);
    StarElem x = random_star_term(g, rng, 3, 3, 1.0) + random_star_term(g, rng, 3, 3, 1.0);
    CylFn q = star_expectation(star_multiply(star_adjoint(x), x));
    CHECK(min_real(q) >= -1e-12);
    CHECK(max_imag_abs(q) < 1e-12);
  }

  // gauge-fixed star elements map to span form with the same expectation
  Rng rng(71);
  StarElem y = StarElem::term(sample_fn(g, 2, 62), 2, 2, sample_fn(g, 2, 63)) +
               StarElem::term(sample_fn(g, 2, 64), 1, 1, sample_fn(g, 2, 65));
  SpanElem span = to_span(y);
  CHECK(max_diff(span_expectation(span), star_expectation(y)) < 1e-14);
  CHECK_THROWS_WITH_AS(to_span(StarElem::isometry(g)), doctest::Contains("MixedIndices"),
                       Error);
}

TEST_CASE("ground functional keeps only the scalar corner") {
  Sft f = full_shift();
  RealVec nu(2);
  nu << 0.5, 0.5;
  RealMat q(2, 2);
  q << 0.5, 0.5, 0.5, 0.5;
  CylMeasure phi = make_markov_measure(f, nu, q);

  CHECK(ground_functional(StarElem::from_fn(CylFn::constant(f, 1.0)), phi) == Complex(1.0));

  for (int n = 0; n <= 3; ++n)
    for (int m = 0; m <= 3; ++m) {
      if (n == 0 && m == 0) continue;
      StarElem x = StarElem::term(sample_fn(f, 2, 80 + n), n, m, sample_fn(f, 2, 90 + m));
      CHECK(ground_functional(x, phi) == Complex(0.0));
    }

  CylFn i0 = CylFn::indicator(f, Word{0});
  CHECK(std::abs(ground_functional(StarElem::term(i0, 0, 0, i0), phi) - Complex(0.5)) < 1e-15);
}

TEST_CASE("the quasi-basis redundancy reproduces weighted isometries") {
  Sft f = full_shift();
  Sft g = golden_mean();

  StarElem kf = quasi_basis_redundancy(f);
  REQUIRE(kf.terms.size() == 2);
  for (const StarTerm& t : kf.terms) {
    CHECK(t.up == 1);
    CHECK(t.down == 1);
    // u_j u_j = 2 1_[j] on the full shift
    CHECK(max_diff(t.left * t.right, 2.0 * promote(t.left * t.left * CylFn::constant(f, 0.5), 2)) <
          1e-14);
  }
  CHECK(approx_equal(star_expectation(kf), CylFn::constant(f, 1.0)));

  for (const Sft& s : {f, g}) {
    StarElem k = quasi_basis_redundancy(s);
    CHECK(approx_equal(star_expectation(k), CylFn::constant(s, 1.0)));
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
      CylFn b = sample_fn(s, 3, seed + 200);
      StarElem bs = StarElem::term(b, 1, 0, CylFn::constant(s, 1.0));
      StarElem kb = star_multiply(k, bs);
      REQUIRE(kb.terms.size() == 1);
      CHECK(kb.terms[0].up == 1);
      CHECK(kb.terms[0].down == 0);
      CHECK(max_diff(kb.terms[0].left, b) < 1e-13);
    }
  }
}
