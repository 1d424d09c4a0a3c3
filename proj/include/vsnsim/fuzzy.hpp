#pragma once

// Ordered trapezoidal fuzzy numbers: the quadruple value type used for
// vehicle positions, velocities, counts and times throughout the belief
// model and the controller. Arithmetic is strictly componentwise and never
// reorders the quadruple; callers normalize explicitly where an operation
// requires q1 <= q2 <= q3 <= q4.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace vsnsim {

struct FuzzyNumber {
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double q4 = 0.0;

  constexpr FuzzyNumber() = default;
  constexpr FuzzyNumber(double a, double b, double c, double d)
      : q1(a), q2(b), q3(c), q4(d) {}

  static constexpr FuzzyNumber crisp(double v) { return {v, v, v, v}; }

  constexpr bool is_crisp() const { return q1 == q2 && q2 == q3 && q3 == q4; }
  constexpr bool is_proper() const { return q1 <= q2 && q2 <= q3 && q3 <= q4; }

  // Ascending sort of the components. Idempotent; preserves the multiset.
  FuzzyNumber normalized() const {
    std::array<double, 4> c{q1, q2, q3, q4};
    std::sort(c.begin(), c.end());
    return {c[0], c[1], c[2], c[3]};
  }

  constexpr double component(int k) const {
    switch (k) {
      case 0: return q1;
      case 1: return q2;
      case 2: return q3;
      default: return q4;
    }
  }

  bool operator==(const FuzzyNumber&) const = default;
};

// Componentwise lift of an arbitrary binary real operation.
template <class Op>
constexpr FuzzyNumber apply_binary(const FuzzyNumber& a, const FuzzyNumber& b, Op op) {
  return {op(a.q1, b.q1), op(a.q2, b.q2), op(a.q3, b.q3), op(a.q4, b.q4)};
}

constexpr FuzzyNumber operator+(const FuzzyNumber& a, const FuzzyNumber& b) {
  return {a.q1 + b.q1, a.q2 + b.q2, a.q3 + b.q3, a.q4 + b.q4};
}

constexpr FuzzyNumber operator-(const FuzzyNumber& a, const FuzzyNumber& b) {
  return {a.q1 - b.q1, a.q2 - b.q2, a.q3 - b.q3, a.q4 - b.q4};
}

constexpr FuzzyNumber fuzzy_min(const FuzzyNumber& a, const FuzzyNumber& b) {
  return apply_binary(a, b, [](double x, double y) { return x < y ? x : y; });
}

constexpr FuzzyNumber fuzzy_max(const FuzzyNumber& a, const FuzzyNumber& b) {
  return apply_binary(a, b, [](double x, double y) { return x > y ? x : y; });
}

inline FuzzyNumber fuzzy_div(const FuzzyNumber& a, const FuzzyNumber& b) {
  if (b.q1 == 0.0 || b.q2 == 0.0 || b.q3 == 0.0 || b.q4 == 0.0)
    throw std::domain_error("fuzzy_div: zero denominator component");
  return {a.q1 / b.q1, a.q2 / b.q2, a.q3 / b.q3, a.q4 / b.q4};
}

// Area under the membership function. Zero exactly for crisp numbers.
// Expects a proper quadruple; the absolute values make the formula total.
inline double uncertainty(const FuzzyNumber& a) {
  return 0.5 * std::abs(a.q1 - a.q2) + std::abs(a.q2 - a.q3) +
         0.5 * std::abs(a.q3 - a.q4);
}

namespace detail {

// Trapezoidal membership normalized to a unit-area probability density.
// Valid only for proper, non-crisp quadruples.
struct TrapDensity {
  double a, b, c, d;
  double area;

  explicit TrapDensity(const FuzzyNumber& f)
      : a(f.q1), b(f.q2), c(f.q3), d(f.q4),
        area(0.5 * (b - a) + (c - b) + 0.5 * (d - c)) {}

  double pdf(double x) const {
    if (x < a || x > d) return 0.0;
    if (x < b) return (x - a) / (b - a) / area;
    if (x <= c) return 1.0 / area;
    return (d - x) / (d - c) / area;
  }

  double cdf(double x) const {
    if (x <= a) return 0.0;
    if (x >= d) return 1.0;
    if (x < b) return 0.5 * (x - a) * (x - a) / (b - a) / area;
    if (x <= c) return (0.5 * (b - a) + (x - b)) / area;
    return 1.0 - 0.5 * (d - x) * (d - x) / (d - c) / area;
  }

  double survival(double x) const { return 1.0 - cdf(x); }
};

}  // namespace detail

// P(A < B) where each non-crisp operand is a random variable distributed by
// its membership function normalized to unit area and crisp operands are
// point masses. The integrand pdf_A(x) * survival_B(x) is piecewise cubic,
// so per-piece Simpson over the merged breakpoints is exact.
inline double prob_less(const FuzzyNumber& a0, const FuzzyNumber& b0) {
  const FuzzyNumber a = a0.normalized();
  const FuzzyNumber b = b0.normalized();
  const bool ca = a.is_crisp();
  const bool cb = b.is_crisp();
  if (ca && cb) return a.q1 < b.q1 ? 1.0 : 0.0;
  if (ca) return detail::TrapDensity(b).survival(a.q1);
  if (cb) return detail::TrapDensity(a).cdf(b.q1);

  const detail::TrapDensity fa(a);
  const detail::TrapDensity fb(b);
  std::array<double, 8> pts{a.q1, a.q2, a.q3, a.q4, b.q1, b.q2, b.q3, b.q4};
  std::sort(pts.begin(), pts.end());

  const auto integrand = [&](double x) { return fa.pdf(x) * fb.survival(x); };
  double p = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double lo = std::max(pts[i], a.q1);
    const double hi = std::min(pts[i + 1], a.q4);
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    p += (hi - lo) / 6.0 * (integrand(lo) + 4.0 * integrand(mid) + integrand(hi));
  }
  return std::clamp(p, 0.0, 1.0);
}

inline double prob_equal(const FuzzyNumber& a0, const FuzzyNumber& b0) {
  const FuzzyNumber a = a0.normalized();
  const FuzzyNumber b = b0.normalized();
  if (a.is_crisp() && b.is_crisp()) return a.q1 == b.q1 ? 1.0 : 0.0;
  return 0.0;
}

inline double prob_greater(const FuzzyNumber& a, const FuzzyNumber& b) {
  return prob_less(b, a);
}

inline double prob_geq(const FuzzyNumber& a, const FuzzyNumber& b) {
  return prob_greater(a, b) + prob_equal(a, b);
}

struct ArgmaxResult {
  std::size_t index = 0;
  double confidence = 1.0;
};

// Index maximizing min_{j != i} P(v_i >= v_j); ties go to the lowest index.
// The confidence is that max-min probability (1.0 for a singleton list).
inline ArgmaxResult fuzzy_argmax(std::span<const FuzzyNumber> values) {
  if (values.empty()) throw std::invalid_argument("fuzzy_argmax: empty list");
  if (values.size() == 1) return {0, 1.0};

  ArgmaxResult best{0, -1.0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    double conf = 1.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (j == i) continue;
      conf = std::min(conf, prob_geq(values[i], values[j]));
    }
    if (conf > best.confidence) best = {i, conf};
  }
  return best;
}

}  // namespace vsnsim
