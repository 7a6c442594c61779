#include <doctest.h>

#include "oracles.hpp"
#include "sftkms/sft.hpp"
#include "sftkms/cylinder.hpp"

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

}  // namespace

TEST_CASE("building shifts validates the transition matrix") {
  CHECK(full_shift().primitive());
  CHECK(golden_mean().primitive());  // square of the matrix is positive

  IntMat dead(2, 2);
  dead << 1, 1, 0, 0;
  CHECK_THROWS_WITH_AS(Sft::make(2, dead), doctest::Contains("RowDead"), Error);

  IntMat nosurj(2, 2);
  nosurj << 1, 0, 1, 0;
  CHECK_THROWS_WITH_AS(Sft::make(2, nosurj), doctest::Contains("NotSurjective"), Error);

  IntMat bad(2, 2);
  bad << 1, 2, 1, 1;
  CHECK_THROWS_WITH_AS(Sft::make(2, bad), doctest::Contains("BadShape"), Error);
  CHECK_THROWS_AS(Sft::make(0, IntMat::Ones(1, 1)), Error);
  CHECK_THROWS_AS(Sft::make(3, IntMat::Ones(2, 2)), Error);

  IntMat loops = IntMat::Identity(2, 2);
  Sft two_loops = Sft::make(2, loops);
  CHECK_FALSE(two_loops.primitive());
}

TEST_CASE("admissible words match brute enumeration") {
  Sft g = golden_mean();
  const WordIndex& d2 = g.words(2);
  REQUIRE(d2.count() == 3);
  CHECK(d2.word(0) == Word{0, 0});
  CHECK(d2.word(1) == Word{0, 1});
  CHECK(d2.word(2) == Word{1, 0});
  CHECK(g.words(3).count() == 5);
  CHECK(full_shift().words(3).count() == 8);
  CHECK(g.words(0).count() == 1);
  CHECK(g.words(0).word(0).empty());

  // brute-force counts, including a 3-letter system
  IntMat t3(3, 3);
  t3 << 1, 1, 0, 0, 1, 1, 1, 0, 1;
  Sft s3 = Sft::make(3, t3);
  for (const Sft& s : {g, full_shift(), s3}) {
    for (int d = 0; d <= 7; ++d) {
      auto brute = oracle::brute_words(s.transitions(), d);
      REQUIRE(s.words(d).count() == static_cast<int>(brute.size()));
      for (std::size_t i = 0; i < brute.size(); ++i) CHECK(s.words(d).word(i) == brute[i]);
    }
  }

  // lookup is the inverse of enumeration
  const WordIndex& d4 = g.words(4);
  for (int i = 0; i < d4.count(); ++i) CHECK(d4.index_of(d4.word(i)) == i);
  CHECK(d4.find(Word{1, 1, 0, 0}) == -1);
}

TEST_CASE("word count equals the transition power sum") {
  for (const Sft& s : {golden_mean(), full_shift()}) {
    IntMat power = IntMat::Identity(2, 2);
    for (int d = 1; d <= 9; ++d) {
      CHECK(s.words(d).count() == power.sum());
      power = (power * s.transitions()).eval();
    }
  }
}

TEST_CASE("promotion preserves evaluations") {
  Sft g = golden_mean();
  CylFn one = CylFn::constant(g, 1.0);
  CylFn p = promote(one, 2);
  CHECK(p.depth() == 2);
  for (int i = 0; i < 3; ++i) CHECK(p.values()[i] == Complex(1.0));

  CylFn ind0 = CylFn::indicator(g, Word{0});
  CylFn q = promote(ind0, 2);
  CHECK(q.values()[0] == Complex(1.0));  // 00
  CHECK(q.values()[1] == Complex(1.0));  // 01
  CHECK(q.values()[2] == Complex(0.0));  // 10

  CHECK(approx_equal(promote(promote(ind0, 3), 5), promote(ind0, 5), 0.0));
  CHECK(sup_norm(promote(ind0, 4)) == sup_norm(ind0));
  CHECK_THROWS_WITH_AS(promote(q, 1), doctest::Contains("DepthDecrease"), Error);
}

TEST_CASE("pointwise algebra") {
  Sft g = golden_mean();
  CylFn i0 = CylFn::indicator(g, Word{0});
  CylFn i1 = CylFn::indicator(g, Word{1});
  CHECK(approx_equal(i0 + i1, CylFn::constant(g, 1.0), 0.0));
  CHECK(sup_norm(i0 * i1) == 0.0);

  CylFn z = Complex(0, 1) * CylFn::constant(g, 1.0);
  CHECK(approx_equal(conj(z), Complex(0, -1) * CylFn::constant(g, 1.0), 0.0));

  Sft f = full_shift();
  CHECK_THROWS_WITH_AS(CylFn::indicator(f, Word{0}) + i0, doctest::Contains("SftMismatch"),
                       Error);

  Vec vals(2);
  vals << 0.5, Complex(-1.5, 0.0);
  CHECK(sup_norm(CylFn::from_values(g, 1, vals)) == doctest::Approx(1.5));
  CHECK(sup_norm(CylFn::constant(g, 0.0)) == 0.0);
  CHECK(sup_norm(i0) == 1.0);
}

TEST_CASE("pointwise transforms") {
  Sft g = golden_mean();
  const double e = std::exp(1.0);

  // h = e, z = i ln 2 gives h^{iz} = 1/2
  CylFn h = CylFn::constant(g, e);
  CylFn half = complex_power(h, Complex(0.0, std::log(2.0)));
  CHECK(max_diff(half, CylFn::constant(g, 0.5)) < 1e-15);
  CHECK(max_diff(complex_power(h, 0.0), CylFn::constant(g, 1.0)) == 0.0);

  Vec vals(2);
  vals << e, e * e;
  CylFn h1 = CylFn::from_values(g, 1, vals);
  CylFn powed = pow(h1, -1.0);
  CHECK(powed.values()[0].real() == doctest::Approx(1.0 / e).epsilon(1e-14));
  CHECK(powed.values()[1].real() == doctest::Approx(1.0 / (e * e)).epsilon(1e-14));
  CHECK(max_diff(complex_power(h1, Complex(0.0, 1.0)), powed) < 1e-14);

  CHECK(max_diff(exp(log(h1)), h1) < 1e-13);
  CHECK_THROWS_WITH_AS(log(CylFn::indicator(g, Word{0})), doctest::Contains("NonPositive"),
                       Error);
  CHECK_THROWS_AS(pow(CylFn::constant(g, -2.0), 0.5), Error);
}

TEST_CASE("higher block recoding") {
  Sft g = golden_mean();

  BlockRecode r2 = higher_block_recode(g, 2);
  CHECK(r2.block.alphabet_size() == 2);
  CHECK(r2.block.transitions() == g.transitions());

  BlockRecode r3 = higher_block_recode(g, 3);
  CHECK(r3.block.alphabet_size() == 3);  // letters 00, 01, 10
  CHECK(r3.block.transitions().sum() == 5);
  CHECK(r3.letters[0] == Word{0, 0});
  CHECK(r3.letters[1] == Word{0, 1});
  CHECK(r3.letters[2] == Word{1, 0});
  // expansion overlaps letters
  CHECK(r3.expand(Word{0, 1, 2}) == Word{0, 0, 1, 0});

  BlockRecode f3 = higher_block_recode(full_shift(), 3);
  CHECK(f3.block.alphabet_size() == 4);
  CHECK(f3.block.transitions().sum() == 8);

  // block admissibility mirrors base admissibility
  for (int d = 1; d <= 4; ++d)
    CHECK(r3.block.words(d).count() == g.words(d + 1).count());

  CHECK_THROWS_AS(higher_block_recode(g, 1), Error);
}

TEST_CASE("word dimension cap yields a clear error") {
  int saved = settings().dim_cap;
  settings().dim_cap = 6;
  CHECK_THROWS_WITH_AS(full_shift().words(3), doctest::Contains("DimensionCap"), Error);
  settings().dim_cap = saved;
  CHECK(full_shift().words(3).count() == 8);
}
