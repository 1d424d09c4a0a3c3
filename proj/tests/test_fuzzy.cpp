#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "vsnsim/fuzzy.hpp"
#include "support/grid_oracle.hpp"

using vsnsim::FuzzyNumber;

namespace {

using vsnsim_test::oracle_prob_less;

FuzzyNumber random_proper(std::mt19937_64& gen, double lo = -20.0, double hi = 60.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::array<double, 4> c{u(gen), u(gen), u(gen), u(gen)};
  std::sort(c.begin(), c.end());
  return {c[0], c[1], c[2], c[3]};
}

}  // namespace

TEST_CASE("componentwise arithmetic follows the quadruple law") {
  const FuzzyNumber a{1, 2, 3, 4};
  CHECK(a + FuzzyNumber::crisp(0) == a);
  CHECK(a + FuzzyNumber{1, 1, 2, 2} == FuzzyNumber{2, 3, 5, 6});
  CHECK(vsnsim::fuzzy_min(a, FuzzyNumber{0, 3, 3, 5}) == FuzzyNumber{0, 2, 3, 4});

  std::mt19937_64 gen(7);
  for (int t = 0; t < 200; ++t) {
    const FuzzyNumber x = random_proper(gen);
    const FuzzyNumber y = random_proper(gen);
    for (int k = 0; k < 4; ++k) {
      CHECK((x + y).component(k) == x.component(k) + y.component(k));
      CHECK((x - y).component(k) == x.component(k) - y.component(k));
      CHECK(vsnsim::fuzzy_min(x, y).component(k) == std::min(x.component(k), y.component(k)));
      CHECK(vsnsim::fuzzy_max(x, y).component(k) == std::max(x.component(k), y.component(k)));
    }
    // addition of proper operands stays proper
    CHECK((x + y).is_proper());
  }
}

TEST_CASE("subtraction can produce improper quadruples; normalize repairs them") {
  const FuzzyNumber a{1, 2, 3, 4};
  const FuzzyNumber b{0, 3, 3, 5};
  const FuzzyNumber d = a - b;   // {1,-1,0,-1}
  CHECK_FALSE(d.is_proper());
  CHECK(d.normalized() == FuzzyNumber{-1, -1, 0, 1});

  CHECK(FuzzyNumber{0, -1, 0, 0}.normalized() == FuzzyNumber{-1, 0, 0, 0});
  CHECK(FuzzyNumber{1, 2, 3, 4}.normalized() == FuzzyNumber{1, 2, 3, 4});
  CHECK(FuzzyNumber{4, 3, 2, 1}.normalized() == FuzzyNumber{1, 2, 3, 4});
  // idempotent
  CHECK(d.normalized().normalized() == d.normalized());
}

TEST_CASE("uncertainty is the membership area") {
  CHECK(vsnsim::uncertainty(FuzzyNumber{3, 3, 3, 3}) == 0.0);
  CHECK(vsnsim::uncertainty(FuzzyNumber{2, 3, 5, 6}) == 3.0);
  CHECK(vsnsim::uncertainty(FuzzyNumber{0, 2, 2, 4}) == 2.0);

  std::mt19937_64 gen(11);
  for (int t = 0; t < 200; ++t) {
    const FuzzyNumber x = random_proper(gen).normalized();
    const double u = vsnsim::uncertainty(x);
    CHECK(u >= 0.0);
    CHECK((u == 0.0) == x.is_crisp());
  }
}

TEST_CASE("fuzzy_div guards zero denominator components") {
  CHECK_THROWS_AS(vsnsim::fuzzy_div(FuzzyNumber::crisp(1), FuzzyNumber{0, 1, 2, 3}),
                  std::domain_error);
  CHECK(vsnsim::fuzzy_div(FuzzyNumber{4, 5, 5, 6}, FuzzyNumber::crisp(15)) ==
        FuzzyNumber{4.0 / 15, 1.0 / 3, 1.0 / 3, 6.0 / 15});
}

TEST_CASE("prob_less: crisp and degenerate cases") {
  const FuzzyNumber z = FuzzyNumber::crisp(0);
  CHECK(vsnsim::prob_less(z, z) == 0.0);
  CHECK(vsnsim::prob_equal(z, z) == 1.0);
  CHECK(vsnsim::prob_less(FuzzyNumber{0, 1, 1, 2}, FuzzyNumber{5, 6, 6, 7}) == 1.0);
  CHECK(vsnsim::prob_less(FuzzyNumber{5, 6, 6, 7}, FuzzyNumber{0, 1, 1, 2}) == 0.0);

  // identical non-crisp operands split evenly
  const FuzzyNumber t{0, 2, 2, 4};
  CHECK_THAT(vsnsim::prob_less(t, t), Catch::Matchers::WithinAbs(0.5, 1e-9));
  CHECK(vsnsim::prob_equal(t, t) == 0.0);

  // one crisp operand integrates the other's density over the half-line
  CHECK_THAT(vsnsim::prob_less(FuzzyNumber::crisp(2), t),
             Catch::Matchers::WithinAbs(0.5, 1e-9));
  CHECK_THAT(vsnsim::prob_less(t, FuzzyNumber::crisp(2)),
             Catch::Matchers::WithinAbs(0.5, 1e-9));
}

TEST_CASE("prob_less matches the grid oracle and satisfies the complement law") {
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<int> coin(0, 4);
  for (int t = 0; t < 1000; ++t) {
    FuzzyNumber a = random_proper(gen);
    FuzzyNumber b = random_proper(gen);
    if (coin(gen) == 0) a = FuzzyNumber::crisp(a.q1);   // exercise point masses
    if (coin(gen) == 0) b = FuzzyNumber::crisp(b.q2);

    const double pl = vsnsim::prob_less(a, b);
    const double pg = vsnsim::prob_greater(a, b);
    const double pe = vsnsim::prob_equal(a, b);

    CHECK_THAT(pl, Catch::Matchers::WithinAbs(oracle_prob_less(a, b), 1e-3));
    CHECK_THAT(pl + pg + pe, Catch::Matchers::WithinAbs(1.0, 1e-6));
    CHECK(pl == vsnsim::prob_greater(b, a));
    CHECK(pl >= 0.0);
    CHECK(pl <= 1.0);
  }
}

TEST_CASE("fuzzy_argmax") {
  using vsnsim::fuzzy_argmax;
  {
    const std::vector<FuzzyNumber> v{FuzzyNumber::crisp(5), FuzzyNumber::crisp(2)};
    const auto r = fuzzy_argmax(v);
    CHECK(r.index == 0);
    CHECK(r.confidence == 1.0);
  }
  {
    const std::vector<FuzzyNumber> v{FuzzyNumber{0, 2, 2, 4}};
    const auto r = fuzzy_argmax(v);
    CHECK(r.index == 0);
    CHECK(r.confidence == 1.0);
  }
  {
    const std::vector<FuzzyNumber> v{FuzzyNumber{0, 2, 2, 4}, FuzzyNumber{0, 2, 2, 4}};
    const auto r = fuzzy_argmax(v);
    CHECK(r.index == 0);
    CHECK_THAT(r.confidence, Catch::Matchers::WithinAbs(0.5, 1e-9));
  }
  CHECK_THROWS_AS(fuzzy_argmax(std::span<const FuzzyNumber>{}), std::invalid_argument);

  // all-crisp inputs reduce to ordinary argmax with lowest-index tie-break
  std::mt19937_64 gen(5);
  std::uniform_int_distribution<int> val(0, 9);
  std::uniform_int_distribution<int> len(1, 6);
  for (int t = 0; t < 300; ++t) {
    std::vector<FuzzyNumber> v;
    std::vector<int> raw;
    const int n = len(gen);
    for (int i = 0; i < n; ++i) {
      raw.push_back(val(gen));
      v.push_back(FuzzyNumber::crisp(raw.back()));
    }
    const auto expect = std::max_element(raw.begin(), raw.end()) - raw.begin();
    CHECK(fuzzy_argmax(v).index == static_cast<std::size_t>(expect));
  }
}

TEST_CASE("prob_less is invariant under common positive scaling") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> scale(0.1, 25.0);
  for (int t = 0; t < 100; ++t) {
    const FuzzyNumber a = random_proper(gen, 0.0, 40.0);
    const FuzzyNumber b = random_proper(gen, 0.0, 40.0);
    const double c = scale(gen);
    const auto mul = [c](const FuzzyNumber& f) {
      return FuzzyNumber{f.q1 * c, f.q2 * c, f.q3 * c, f.q4 * c};
    };
    CHECK_THAT(vsnsim::prob_less(mul(a), mul(b)),
               Catch::Matchers::WithinAbs(vsnsim::prob_less(a, b), 1e-9));
  }
}
