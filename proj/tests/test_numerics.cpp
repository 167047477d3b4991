#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "histlda/numerics.hpp"
#include "stat_helpers.hpp"

using namespace histlda;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEulerGamma = 0.57721566490153286060651209;
}  // namespace

TEST_CASE("ln_gamma at identities") {
  CHECK(std::abs(ln_gamma(1.0)) <= 1e-12);
  CHECK(std::abs(ln_gamma(2.0)) <= 1e-12);
  CHECK(ln_gamma(0.5) == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-15));
  CHECK(std::abs(ln_gamma(0.5) - 0.5723649429247000870717137) <= 1e-12);
}

TEST_CASE("ln_gamma against high-precision reference values") {
  // mpmath.loggamma at 40 digits
  struct Ref {
    double x, value;
  };
  const Ref refs[] = {
      {1e-6, 13.81550998074943166920783}, {0.1, 2.252712651734205959869702},
      {1.5, -0.1207822376352452223455184}, {3.7, 1.428072326665387921872381},
      {10.0, 12.80182748008146961120772}, {100.0, 359.134205369575398776044},
      {1e6, 12815504.56914761165997697},
  };
  for (const auto& r : refs) {
    CAPTURE(r.x);
    // absolute 1e-12, widened to a few ulps where |value| makes 1e-12 unrepresentable
    const double tol = std::max(1e-12, 8.0 * std::numeric_limits<double>::epsilon() * std::abs(r.value));
    CHECK(std::abs(ln_gamma(r.x) - r.value) <= tol);
  }
}

TEST_CASE("ln_gamma agrees with std::lgamma across the working range") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double x = std::exp(rng.uniform(std::log(1e-6), std::log(1e6)));
    const double ref = std::lgamma(x);
    CAPTURE(x);
    CHECK(std::abs(ln_gamma(x) - ref) <= std::max(1e-12, 1e-14 * std::abs(ref)));
  }
}

TEST_CASE("ln_gamma recurrence property") {
  Rng rng(11);
  for (int i = 0; i < 10000; ++i) {
    double x = 100.0 * rng.uniform();
    if (x == 0.0) continue;
    CHECK(std::abs(ln_gamma(x + 1.0) - ln_gamma(x) - std::log(x)) <= 1e-10);
  }
}

TEST_CASE("special functions reject non-positive arguments") {
  CHECK_THROWS_AS(ln_gamma(0.0), std::domain_error);
  CHECK_THROWS_AS(ln_gamma(-1.5), std::domain_error);
  CHECK_THROWS_AS(digamma(0.0), std::domain_error);
  CHECK_THROWS_AS(digamma(-3.0), std::domain_error);
  CHECK_THROWS_AS(digamma(std::nan("")), std::domain_error);
}

TEST_CASE("digamma identities and reference values") {
  CHECK(std::abs(digamma(0.5) - (-kEulerGamma - 2.0 * std::log(2.0))) <= 1e-10);
  CHECK(std::abs(digamma(0.5) - (-1.963510026021423479440976)) <= 1e-10);
  CHECK(std::abs(digamma(2.0) - (digamma(1.0) + 1.0)) <= 1e-12);
  CHECK(std::abs(digamma(1.0) + kEulerGamma) <= 1e-12);
  CHECK(std::abs(digamma(10.0) - 2.251752589066721107647456) <= 1e-10);

  // mpmath.digamma at 40 digits
  CHECK(std::abs(digamma(1e-6) - (-1000000.577214019968668068)) <= 1e-9);
  CHECK(std::abs(digamma(0.1) - (-10.42375494041107679516822)) <= 1e-10);
  CHECK(std::abs(digamma(3.7) - 1.167153539361511385873864) <= 1e-10);
  CHECK(std::abs(digamma(100.0) - 4.600161852738087400198606) <= 1e-10);
  CHECK(std::abs(digamma(1e6) - 13.81551005796419077077462) <= 1e-10);
}

TEST_CASE("digamma matches the numerical derivative of ln_gamma") {
  for (double x : {0.3, 1.0, 2.5, 10.0, 47.0, 300.0}) {
    const double h = 1e-5 * std::max(1.0, x);
    const double fd = (ln_gamma(x + h) - ln_gamma(x - h)) / (2.0 * h);
    CAPTURE(x);
    CHECK(std::abs(digamma(x) - fd) <= 1e-6);
  }
}

TEST_CASE("Rng reproduces the reference xoshiro256** stream") {
  Rng rng(42);
  CHECK(rng.next_u64() == 0x15780b2e0c2ec716ULL);
  CHECK(rng.next_u64() == 0x6104d9866d113a7eULL);
  CHECK(rng.next_u64() == 0xae17533239e499a1ULL);
}

TEST_CASE("Rng streams are deterministic and children differ") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng master(5);
  Rng c0 = master.child(0), c0b = master.child(0), c1 = master.child(1);
  const auto x = c0.next_u64();
  CHECK(x == c0b.next_u64());
  CHECK(x != c1.next_u64());
  CHECK(Rng(5).child(0).next_u64() != Rng(6).child(0).next_u64());
}

TEST_CASE("uniform draws stay in [lo, hi)") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    const double v = rng.uniform(1.0, 1.5);
    CHECK((v >= 1.0 && v < 1.5));
  }
}

TEST_CASE("gamma and dirichlet draws have the right moments") {
  Rng rng(9);
  for (double shape : {0.3, 1.0, 4.5}) {
    const int n = 100000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      sum += g;
      sq += g * g;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CAPTURE(shape);
    CHECK(mean == doctest::Approx(shape).epsilon(0.03));
    CHECK(var == doctest::Approx(shape).epsilon(0.06));
  }
  for (double conc : {1e-6, 0.5, 1.0}) {
    const auto w = rng.dirichlet(conc, 4);
    double s = 0.0;
    for (double v : w) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sample_categorical_log with equal weights is uniform") {
  for (double c : {0.0, -700.0, 350.0}) {
    Rng rng(17);
    const std::vector<double> lw{c, c, c};
    std::vector<double> counts(3, 0.0);
    const int n = 100000;
    for (int i = 0; i < n; ++i) counts[sample_categorical_log(lw, rng)] += 1.0;
    CAPTURE(c);
    CHECK(test::chi_square_statistic(counts, {1.0 / 3, 1.0 / 3, 1.0 / 3}, n) <
          test::chi_square_critical_01(2));
  }
}

TEST_CASE("sample_categorical_log zero-probability branch") {
  Rng rng(1);
  const std::vector<double> lw{0.0, -kInf};
  for (int i = 0; i < 10000; ++i) CHECK(sample_categorical_log(lw, rng) == 0);
}

TEST_CASE("sample_categorical_log normalizes weights") {
  Rng rng(2);
  const std::vector<double> lw{std::log(1.0), std::log(3.0)};
  const int n = 100000;
  int second = 0;
  for (int i = 0; i < n; ++i) second += sample_categorical_log(lw, rng) == 1;
  CHECK(std::abs(static_cast<double>(second) / n - 0.75) <= 0.01);
}

TEST_CASE("sample_categorical_log is invariant to a constant shift") {
  const std::vector<double> base{-1.0, 0.5, 2.0, -0.3};
  std::vector<double> shifted = base;
  for (double& v : shifted) v += 812.25;
  Rng ra(100), rb(200);
  std::vector<double> ca(4, 0.0), cb(4, 0.0);
  for (int i = 0; i < 100000; ++i) {
    ca[sample_categorical_log(base, ra)] += 1.0;
    cb[sample_categorical_log(shifted, rb)] += 1.0;
  }
  CHECK(test::chi_square_two_sample(ca, cb) < test::chi_square_critical_01(3));
}

TEST_CASE("sample_categorical_log rejects bad input") {
  Rng rng(0);
  CHECK_THROWS_AS(sample_categorical_log(std::vector<double>{}, rng), std::invalid_argument);
  CHECK_THROWS_AS(sample_categorical_log(std::vector<double>{0.0, std::nan("")}, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_categorical_log(std::vector<double>{-kInf, -kInf}, rng),
                  std::invalid_argument);
}

TEST_CASE("log_sum_exp is stable for large magnitudes") {
  const std::vector<double> v{1000.0, 1000.0};
  CHECK(log_sum_exp(v) == doctest::Approx(1000.0 + std::log(2.0)));
  const std::vector<double> w{-1000.0, -kInf};
  CHECK(log_sum_exp(w) == doctest::Approx(-1000.0));
}
