#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "evosand/graph.hpp"

namespace evosand {

using Size = std::int64_t;

// All samples equal: no cut-off/exponent can be estimated.
struct DegenerateData : InputError {
  using InputError::InputError;
};

struct PowerLawFit {
  Size x_min = 1;
  double alpha = 0;
  double ks = 0;
  std::size_t n_tail = 0;
  // Set when the selected tail is too short to trust.
  std::optional<std::string> warning;
};

enum class Alternative { Exponential, Lognormal };
std::string to_string(Alternative a);
Alternative parse_alternative(const std::string& name);

struct LrtResult {
  Alternative alternative = Alternative::Exponential;
  double r = 0;
  double p = 1;
};

constexpr std::size_t kMinFitSamples = 50;
constexpr std::size_t kMinTailSamples = 10;
constexpr double kMaxAlpha = 20;

// ζ(s, q) = Σ_{k>=0} (q + k)^-s for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

// P(X <= x) for the discrete power law p(x) = x^-α / ζ(α, x_min), x >= x_min.
double power_law_cdf(Size x, double alpha, Size x_min);

// Discrete maximum-likelihood exponent of the samples >= x_min, by
// golden-section search on (1, kMaxAlpha].
double estimate_alpha(std::span<const Size> samples, Size x_min);

// Largest |F(x) - F_α(x)| over the distinct samples x >= x_min, where F is
// the empirical CDF of those samples.
double ks_distance(std::span<const Size> samples, double alpha, Size x_min);

// Cut-off minimizing the KS distance over the distinct positive sample values
// (the largest excluded), with its exponent. Zeros are ignored.
PowerLawFit fit_power_law(std::span<const Size> samples);

// Log-likelihood ratio of the power law against `alternative`, both fitted on
// the samples >= fit.x_min, with the two-sided normal-approximation p-value
// of its sign.
LrtResult loglikelihood_ratio(std::span<const Size> samples, const PowerLawFit& fit,
                              Alternative alternative);

// Pointwise log-likelihood ratios to a (mean-zero) test: R and p.
LrtResult likelihood_ratio_test(std::span<const double> log_ratio, Alternative alternative);

// Empirical probability of each distinct value, ascending.
std::vector<std::pair<Size, double>> survival_histogram(std::span<const Size> samples);

// Exact inverse-CDF sampler for the discrete power law.
class PowerLawSampler {
 public:
  PowerLawSampler(double alpha, Size x_min);
  Size operator()(std::mt19937_64& rng) const;
  // Value for a uniform variate u in (0, 1]: the x with S(x + 1) < u <= S(x),
  // S being the survival function.
  Size quantile(double u) const;

 private:
  double survival(Size x) const;
  double alpha_;
  Size x_min_;
  double norm_;
};

// Semi-parametric bootstrap goodness-of-fit: fraction of synthetic data sets
// whose own best fit has a KS distance at least the observed one.
double bootstrap_p_value(std::span<const Size> samples, const PowerLawFit& fit,
                         std::size_t resamples, std::uint64_t seed);

}  // namespace evosand
