#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "evosand/powerlaw.hpp"
#include "oracles.hpp"

using namespace evosand;

namespace {

std::vector<Size> synthetic(double alpha, Size x_min, std::size_t n, std::uint64_t seed) {
  static const oracle::PowerLawGenerator* cached = nullptr;
  static double cached_alpha = 0;
  static Size cached_xmin = 0;
  if (!cached || cached_alpha != alpha || cached_xmin != x_min) {
    delete cached;
    cached = new oracle::PowerLawGenerator(alpha, x_min);
    cached_alpha = alpha;
    cached_xmin = x_min;
  }
  std::mt19937_64 rng(seed);
  std::vector<Size> out(n);
  for (auto& x : out) x = (*cached)(rng);
  return out;
}

}  // namespace

TEST_CASE("Hurwitz zeta against high-precision references") {
  // Reference values from a 30-digit evaluation.
  struct Ref {
    double s, q, value;
  };
  const Ref refs[] = {
      {2, 1, 1.6449340668482264365},
      {2.5, 1, 1.3414872572509171798},
      {2.5, 3, 0.16471056195428029866},
      {1.5, 10, 0.64866163194157042215},
      {3, 0.5, 8.4143983221171599978},
      {1.1, 1, 10.584448464950800951},
      {8.2, 853, 1.1006936027147065455e-22},
      {20, 2, 9.5396203387279611315e-7},
      {1.0001, 1, 10000.57722294753897},
      {2.5, 1e6, 6.66667166666875e-10},
  };
  for (const auto& r : refs) {
    CAPTURE(r.s);
    CAPTURE(r.q);
    CHECK(hurwitz_zeta(r.s, r.q) == doctest::Approx(r.value).epsilon(1e-12));
  }
  CHECK_THROWS_AS(hurwitz_zeta(1.0, 1.0), InputError);
}

TEST_CASE("discrete power-law CDF") {
  CHECK(power_law_cdf(1, 2.5, 1) == doctest::Approx(0.74544129628877717492).epsilon(1e-12));
  CHECK(power_law_cdf(2, 2.5, 1) == doctest::Approx(0.87721794518434835066).epsilon(1e-12));
  CHECK(power_law_cdf(10, 2.5, 1) == doctest::Approx(0.98541438136768944433).epsilon(1e-12));
  CHECK(power_law_cdf(100, 2.5, 1) == doctest::Approx(0.99950675081266954827).epsilon(1e-12));
  CHECK(power_law_cdf(0, 2.5, 1) == 0.0);
}

TEST_CASE("KS distance of four ones against alpha 2") {
  const std::vector<Size> ones{1, 1, 1, 1};
  CHECK(ks_distance(ones, 2.0, 1) == doctest::Approx(0.39207289814597337134).epsilon(1e-12));
  CHECK_THROWS_AS(ks_distance(ones, 2.0, 2), InputError);
  CHECK_THROWS_AS(ks_distance(ones, 1.0, 1), InputError);
}

TEST_CASE("maximum-likelihood exponent and KS distance on a small sample") {
  const std::vector<Size> s{1, 1, 1, 2, 2, 3, 5, 8, 13, 40};
  CHECK(estimate_alpha(s, 1) == doctest::Approx(1.5792934016978272169).epsilon(1e-7));
  CHECK(estimate_alpha(s, 2) == doctest::Approx(1.7524916284989650547).epsilon(1e-7));
  CHECK(ks_distance(s, 1.5792934016978272169, 1) == doctest::Approx(0.12662910642241187522).epsilon(1e-9));
  CHECK(ks_distance(s, 1.7524916284989650547, 2) == doctest::Approx(0.085603447360642406688).epsilon(1e-9));
}

TEST_CASE("KS distance after moving one sample") {
  // {3, 1, 1, 1} against alpha 2: the largest gap is at x = 3 (30-digit reference).
  const std::vector<Size> moved{3, 1, 1, 1};
  CHECK(ks_distance(moved, 2.0, 1) == doctest::Approx(0.17254366692090819987).epsilon(1e-12));
}

TEST_CASE("fit refuses degenerate and small data") {
  CHECK_THROWS_AS(fit_power_law(std::vector<Size>(100, 7)), DegenerateData);
  std::vector<Size> zeros_and_sevens(100, 7);
  zeros_and_sevens[0] = 0;
  CHECK_THROWS_AS(fit_power_law(zeros_and_sevens), DegenerateData);
  std::vector<Size> few{1, 2, 3, 4, 5};
  CHECK_THROWS_AS(fit_power_law(few), InputError);
  CHECK_THROWS_AS(fit_power_law(std::vector<Size>{}), InputError);
}

TEST_CASE("fit picks the KS-minimizing cut-off") {
  auto s = synthetic(2.2, 1, 3000, 17);
  for (std::size_t k = 0; k < 400; ++k) s[k] = 1 + static_cast<Size>(k % 5);  // distorted head
  const auto fit = fit_power_law(s);
  std::vector<Size> distinct = s;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  distinct.pop_back();
  double best = 1e9;
  Size best_x = 0;
  for (auto x : distinct) {
    const double d = ks_distance(s, estimate_alpha(s, x), x);
    if (d < best) {
      best = d;
      best_x = x;
    }
  }
  CHECK(fit.x_min == best_x);
  CHECK(fit.ks == doctest::Approx(best).epsilon(1e-12));
  CHECK(fit.alpha > 1);
  CHECK(fit.n_tail == static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [&](Size x) { return x >= fit.x_min; })));
}

TEST_CASE("zeros are ignored by the fit") {
  auto s = synthetic(2.5, 1, 2000, 3);
  const auto a = fit_power_law(s);
  s.insert(s.end(), 500, 0);
  const auto b = fit_power_law(s);
  CHECK(a.x_min == b.x_min);
  CHECK(a.alpha == b.alpha);
  CHECK(a.ks == b.ks);
}

TEST_CASE("recovery of alpha 2.5 from 10^5 samples") {
  const auto s = synthetic(2.5, 1, 100'000, 2024);
  const auto fit = fit_power_law(s);
  CHECK(fit.alpha == doctest::Approx(2.5).epsilon(0.02));
  CHECK(fit.x_min <= 3);
  CHECK(fit.ks < 0.01);
  const auto lrt = loglikelihood_ratio(s, fit, Alternative::Exponential);
  CHECK(lrt.r > 0);
  CHECK(lrt.p < 0.1);
}

TEST_CASE("estimator error shrinks with sample size") {
  std::vector<double> medians;
  for (std::size_t n : {1000, 10'000, 100'000}) {
    std::vector<double> err;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto s = synthetic(2.5, 1, n, seed * 7919 + n);
      err.push_back(std::abs(estimate_alpha(s, 1) - 2.5));
    }
    std::nth_element(err.begin(), err.begin() + 10, err.end());
    medians.push_back(err[10]);
  }
  CHECK(medians[1] <= medians[0]);
  CHECK(medians[2] <= medians[1]);
}

TEST_CASE("likelihood ratio test basics") {
  const std::vector<double> zero(50, 0.0);
  const auto same = likelihood_ratio_test(zero, Alternative::Exponential);
  CHECK(same.r == 0);
  CHECK(same.p == 1);
  const std::vector<double> d{1, -1, 2, -2, 0.5};
  const auto r = likelihood_ratio_test(d, Alternative::Lognormal);
  CHECK(r.r == doctest::Approx(0.5));
  // sigma^2 = mean of squared deviations from 0.1
  const double mean = 0.1;
  double var = 0;
  for (double x : d) var += (x - mean) * (x - mean);
  var /= 5;
  CHECK(r.p == doctest::Approx(std::erfc(0.5 / std::sqrt(2 * 5 * var))));
  CHECK(parse_alternative("lognormal") == Alternative::Lognormal);
  CHECK_THROWS_AS(parse_alternative("weibull"), InputError);
}

TEST_CASE("exponential data prefers the exponential alternative") {
  std::mt19937_64 rng(99);
  std::geometric_distribution<Size> geo(0.2);
  std::vector<Size> s(5000);
  for (auto& x : s) x = 1 + geo(rng);
  PowerLawFit fit;
  fit.x_min = 1;
  fit.alpha = estimate_alpha(s, 1);
  const auto r = loglikelihood_ratio(s, fit, Alternative::Exponential);
  CHECK(r.r < 0);
  CHECK(r.p < 0.1);
}

TEST_CASE("lognormal comparison runs and refuses short tails") {
  const auto s = synthetic(2.5, 1, 5000, 8);
  const auto fit = fit_power_law(s);
  const auto r = loglikelihood_ratio(s, fit, Alternative::Lognormal);
  CHECK(std::isfinite(r.r));
  CHECK(r.p >= 0);
  CHECK(r.p <= 1);
  PowerLawFit far = fit;
  far.x_min = 1'000'000'000;
  CHECK_THROWS_AS(loglikelihood_ratio(s, far, Alternative::Exponential), InputError);
}

TEST_CASE("histogram") {
  const std::vector<Size> s{1, 1, 2};
  const auto h = survival_histogram(s);
  REQUIRE(h.size() == 2);
  CHECK(h[0].first == 1);
  CHECK(h[0].second == doctest::Approx(2.0 / 3));
  CHECK(h[1].second == doctest::Approx(1.0 / 3));
  CHECK(survival_histogram(std::vector<Size>{5}) == std::vector<std::pair<Size, double>>{{5, 1.0}});
  const auto big = synthetic(2.5, 1, 20'000, 4);
  double total = 0;
  for (const auto& [x, p] : survival_histogram(big)) total += p;
  CHECK(std::abs(total - 1) < 1e-12);
}

TEST_CASE("histogram of power-law samples is linear in log-log over the head") {
  const auto s = synthetic(2.5, 1, 100'000, 12);
  const auto h = survival_histogram(s);
  // Least-squares slope of log p against log x over x = 1..20.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [x, p] : h) {
    if (x > 20) break;
    const double lx = std::log(static_cast<double>(x)), ly = std::log(p);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-2.5).epsilon(0.04));
}

TEST_CASE("library sampler matches the reference generator") {
  const PowerLawSampler sampler(2.5, 1);
  CHECK(sampler.quantile(1.0) == 1);
  // S(2) = 1 - F(1) = 0.2545...: u just above it still gives 1, just below gives 2.
  CHECK(sampler.quantile(0.26) == 1);
  CHECK(sampler.quantile(0.25) == 2);
  std::mt19937_64 rng(1);
  std::vector<Size> s(50'000);
  for (auto& x : s) x = sampler(rng);
  const double ones = static_cast<double>(std::count(s.begin(), s.end(), 1)) / 50'000;
  CHECK(ones == doctest::Approx(power_law_cdf(1, 2.5, 1)).epsilon(0.01));
  CHECK(fit_power_law(s).alpha == doctest::Approx(2.5).epsilon(0.03));
}

TEST_CASE("bootstrap p-value is deterministic and accepts true power laws") {
  const auto s = synthetic(2.5, 1, 500, 77);
  const auto fit = fit_power_law(s);
  const double p1 = bootstrap_p_value(s, fit, 40, 5);
  const double p2 = bootstrap_p_value(s, fit, 40, 5);
  CHECK(p1 == p2);
  CHECK(p1 > 0.1);
  CHECK_THROWS_AS(bootstrap_p_value(s, fit, 0, 5), InputError);

  std::vector<Size> uniform(500);
  for (std::size_t k = 0; k < uniform.size(); ++k) uniform[k] = 1 + static_cast<Size>(k % 50);
  const auto bad = fit_power_law(uniform);
  CHECK(bootstrap_p_value(uniform, bad, 40, 5) < 0.1);
}
