#include "sftkms/cylinder.hpp"

#include <algorithm>
#include <cmath>

namespace sftkms {

CylFn CylFn::constant(const Sft& s, Complex c) {
  Vec v(1);
  v[0] = c;
  return CylFn(s, 0, std::move(v));
}

CylFn CylFn::indicator(const Sft& s, std::span<const int> word) {
  const WordIndex& wi = s.words(static_cast<int>(word.size()));
  Vec v = Vec::Zero(wi.count());
  v[wi.index_of(word)] = 1.0;
  return CylFn(s, wi.depth(), std::move(v));
}

CylFn CylFn::from_values(const Sft& s, int depth, Vec values) {
  const WordIndex& wi = s.words(depth);
  if (values.size() != wi.count())
    fail("BadShape", "expected " + std::to_string(wi.count()) + " values at depth " +
                         std::to_string(depth) + ", got " + std::to_string(values.size()));
  return CylFn(s, depth, std::move(values));
}

Complex CylFn::eval(std::span<const int> word) const {
  if (static_cast<int>(word.size()) < depth_)
    fail("BadShape", "word shorter than function depth");
  const WordIndex& wi = sft_->words(depth_);
  return values_[wi.index_of(word.subspan(0, depth_))];
}

CylFn promote(const CylFn& f, int depth) {
  if (depth < f.depth())
    fail("DepthDecrease", "cannot promote from depth " + std::to_string(f.depth()) +
                              " to " + std::to_string(depth));
  if (depth == f.depth()) return f;
  const WordIndex& from = f.sft().words(f.depth());
  const WordIndex& to = f.sft().words(depth);
  Vec v(to.count());
  for (int i = 0; i < to.count(); ++i) {
    std::span<const int> w(to.word(i));
    v[i] = f.values()[from.index_of(w.subspan(0, f.depth()))];
  }
  return CylFn::from_values(f.sft(), depth, std::move(v));
}

std::pair<CylFn, CylFn> align(const CylFn& f, const CylFn& g) {
  if (!f.sft().same_as(g.sft())) fail("SftMismatch", "operands live on different shifts");
  int d = std::max(f.depth(), g.depth());
  return {promote(f, d), promote(g, d)};
}

CylFn operator+(const CylFn& f, const CylFn& g) {
  auto [a, b] = align(f, g);
  return CylFn::from_values(a.sft(), a.depth(), a.values() + b.values());
}

CylFn operator-(const CylFn& f, const CylFn& g) {
  auto [a, b] = align(f, g);
  return CylFn::from_values(a.sft(), a.depth(), a.values() - b.values());
}

CylFn operator*(const CylFn& f, const CylFn& g) {
  auto [a, b] = align(f, g);
  return CylFn::from_values(a.sft(), a.depth(), a.values().cwiseProduct(b.values()));
}

CylFn operator*(Complex c, const CylFn& f) {
  return CylFn::from_values(f.sft(), f.depth(), c * f.values());
}

CylFn operator*(const CylFn& f, Complex c) { return c * f; }

CylFn operator-(const CylFn& f) {
  return CylFn::from_values(f.sft(), f.depth(), -f.values());
}

CylFn conj(const CylFn& f) {
  return CylFn::from_values(f.sft(), f.depth(), f.values().conjugate());
}

namespace {

void require_positive_real(const CylFn& f, const char* what) {
  for (int i = 0; i < f.values().size(); ++i) {
    Complex z = f.values()[i];
    if (std::abs(z.imag()) > settings().alg || z.real() <= 0.0)
      fail("NonPositive", std::string(what) + " requires strictly positive real values");
  }
}

}  // namespace

CylFn exp(const CylFn& f) {
  Vec v = f.values().array().exp();
  return CylFn::from_values(f.sft(), f.depth(), std::move(v));
}

CylFn log(const CylFn& f) {
  require_positive_real(f, "log");
  Vec v(f.values().size());
  for (int i = 0; i < v.size(); ++i) v[i] = std::log(f.values()[i].real());
  return CylFn::from_values(f.sft(), f.depth(), std::move(v));
}

CylFn pow(const CylFn& f, double p) {
  require_positive_real(f, "pow");
  Vec v(f.values().size());
  for (int i = 0; i < v.size(); ++i) v[i] = std::pow(f.values()[i].real(), p);
  return CylFn::from_values(f.sft(), f.depth(), std::move(v));
}

CylFn complex_power(const CylFn& h, Complex z) {
  require_positive_real(h, "complex_power");
  Vec v(h.values().size());
  const Complex iz = Complex(0.0, 1.0) * z;
  for (int i = 0; i < v.size(); ++i) v[i] = std::exp(iz * std::log(h.values()[i].real()));
  return CylFn::from_values(h.sft(), h.depth(), std::move(v));
}

CylFn inverse(const CylFn& f) {
  Vec v(f.values().size());
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(f.values()[i]) < 1e-300) fail("NonPositive", "inverse of a vanishing function");
    v[i] = 1.0 / f.values()[i];
  }
  return CylFn::from_values(f.sft(), f.depth(), std::move(v));
}

double sup_norm(const CylFn& f) {
  double m = 0.0;
  for (int i = 0; i < f.values().size(); ++i) m = std::max(m, std::abs(f.values()[i]));
  return m;
}

double max_diff(const CylFn& f, const CylFn& g) {
  auto [a, b] = align(f, g);
  return sup_norm(a - b);
}

bool approx_equal(const CylFn& f, const CylFn& g, double tol) {
  return max_diff(f, g) <= tol;
}

bool approx_equal(const CylFn& f, const CylFn& g) {
  return approx_equal(f, g, settings().alg);
}

double min_real(const CylFn& f) {
  double m = f.values()[0].real();
  for (int i = 1; i < f.values().size(); ++i) m = std::min(m, f.values()[i].real());
  return m;
}

double max_imag_abs(const CylFn& f) {
  double m = 0.0;
  for (int i = 0; i < f.values().size(); ++i) m = std::max(m, std::abs(f.values()[i].imag()));
  return m;
}

bool entrywise_above(const CylFn& f, double bound, bool strict) {
  if (max_imag_abs(f) > settings().alg) return false;
  double m = min_real(f);
  return strict ? m > bound : m >= bound - settings().alg;
}

}  // namespace sftkms
