#include "evosand/powerlaw.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_sf_zeta.h>

namespace evosand {

namespace {

constexpr double kMinAlpha = 1.0 + 1e-9;

void quiet_gsl() {
  static std::once_flag once;
  std::call_once(once, [] { gsl_set_error_handler_off(); });
}

std::vector<Size> sorted_tail(std::span<const Size> samples, Size x_min) {
  std::vector<Size> tail;
  for (auto x : samples) {
    if (x >= x_min) tail.push_back(x);
  }
  std::sort(tail.begin(), tail.end());
  return tail;
}

double sum_logs(std::span<const Size> tail) {
  double s = 0;
  for (auto x : tail) s += std::log(static_cast<double>(x));
  return s;
}

// Golden-section minimization of a unimodal f on [a, b].
template <typename F>
double golden_section(F f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1) / 2;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return (a + b) / 2;
}

double alpha_mle(std::size_t n, double log_sum, Size x_min) {
  const auto q = static_cast<double>(x_min);
  const auto nd = static_cast<double>(n);
  const auto neg_ll = [&](double a) { return nd * std::log(hurwitz_zeta(a, q)) + a * log_sum; };
  return golden_section(neg_ll, kMinAlpha, kMaxAlpha, 1e-9);
}

// KS distance over a sorted tail; gives up and returns `stop_at` as soon as
// the running maximum reaches it.
double ks_sorted(std::span<const Size> tail, double alpha, Size x_min, double stop_at) {
  const double norm = hurwitz_zeta(alpha, static_cast<double>(x_min));
  const auto n = static_cast<double>(tail.size());
  double d = 0;
  std::size_t k = 0;
  while (k < tail.size()) {
    const Size x = tail[k];
    while (k < tail.size() && tail[k] == x) ++k;
    const double empirical = static_cast<double>(k) / n;
    const double model = 1.0 - hurwitz_zeta(alpha, static_cast<double>(x) + 1) / norm;
    d = std::max(d, std::abs(empirical - model));
    if (d >= stop_at) return stop_at;
  }
  return d;
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// log P(X = x | X >= x_min) for the lognormal discretized on [x, x + 1).
double lognormal_log_pmf(Size x, double mu, double sigma, double log_tail_mass) {
  const double z0 = (std::log(static_cast<double>(x)) - mu) / sigma;
  const double z1 = (std::log(static_cast<double>(x) + 1) - mu) / sigma;
  const double mass = z0 > 0 ? normal_sf(z0) - normal_sf(z1) : normal_cdf(z1) - normal_cdf(z0);
  if (mass > 0) return std::log(mass) - log_tail_mass;
  // Underflow far in the tail: midpoint density.
  const double xm = static_cast<double>(x) + 0.5;
  const double zm = (std::log(xm) - mu) / sigma;
  return -0.5 * zm * zm - std::log(sigma * xm * std::sqrt(2 * M_PI)) - log_tail_mass;
}

struct LognormalData {
  std::span<const Size> tail;
  Size x_min;
};

double lognormal_log_likelihood(std::span<const Size> tail, Size x_min, double mu, double sigma) {
  const double tail_mass = normal_sf((std::log(static_cast<double>(x_min)) - mu) / sigma);
  if (!(tail_mass > 0)) return -std::numeric_limits<double>::infinity();
  const double log_tail_mass = std::log(tail_mass);
  double ll = 0;
  for (auto x : tail) ll += lognormal_log_pmf(x, mu, sigma, log_tail_mass);
  return ll;
}

double lognormal_objective(const gsl_vector* v, void* params) {
  const auto* data = static_cast<const LognormalData*>(params);
  const double mu = gsl_vector_get(v, 0);
  const double sigma = std::exp(gsl_vector_get(v, 1));
  const double ll = lognormal_log_likelihood(data->tail, data->x_min, mu, sigma);
  return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
}

std::pair<double, double> fit_lognormal(std::span<const Size> tail, Size x_min) {
  double mean = 0;
  for (auto x : tail) mean += std::log(static_cast<double>(x));
  mean /= static_cast<double>(tail.size());
  double var = 0;
  for (auto x : tail) var += std::pow(std::log(static_cast<double>(x)) - mean, 2);
  var /= static_cast<double>(tail.size());
  const double sd = var > 0 ? std::sqrt(var) : 1.0;

  LognormalData data{tail, x_min};
  gsl_multimin_function fn{&lognormal_objective, 2, &data};
  gsl_vector* start = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(start, 0, mean);
  gsl_vector_set(start, 1, std::log(sd));
  gsl_vector_set_all(step, 0.5);
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(m, &fn, start, step);
  for (int iter = 0; iter < 5000; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-10) == GSL_SUCCESS) break;
  }
  const double mu = gsl_vector_get(m->x, 0);
  const double sigma = std::exp(gsl_vector_get(m->x, 1));
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(step);
  gsl_vector_free(start);
  return {mu, sigma};
}

}  // namespace

std::string to_string(Alternative a) {
  return a == Alternative::Exponential ? "exponential" : "lognormal";
}

Alternative parse_alternative(const std::string& name) {
  if (name == "exponential") return Alternative::Exponential;
  if (name == "lognormal") return Alternative::Lognormal;
  throw InputError("unknown alternative '" + name + "' (expected exponential or lognormal)");
}

double hurwitz_zeta(double s, double q) {
  if (!(s > 1) || !(q > 0)) throw InputError("hurwitz_zeta needs s > 1 and q > 0");
  quiet_gsl();
  gsl_sf_result r;
  if (gsl_sf_hzeta_e(s, q, &r) != GSL_SUCCESS) {
    // Only underflow is possible for s > 1, q > 0.
    return 0.0;
  }
  return r.val;
}

double power_law_cdf(Size x, double alpha, Size x_min) {
  if (!(alpha > 1) || x_min < 1) throw InputError("power law needs alpha > 1 and x_min >= 1");
  if (x < x_min) return 0.0;
  return 1.0 - hurwitz_zeta(alpha, static_cast<double>(x) + 1) /
                   hurwitz_zeta(alpha, static_cast<double>(x_min));
}

double estimate_alpha(std::span<const Size> samples, Size x_min) {
  if (x_min < 1) throw InputError("x_min must be at least 1");
  const auto tail = sorted_tail(samples, x_min);
  if (tail.empty()) throw InputError("no samples at or above x_min");
  return alpha_mle(tail.size(), sum_logs(tail), x_min);
}

double ks_distance(std::span<const Size> samples, double alpha, Size x_min) {
  if (!(alpha > 1)) throw InputError("alpha must exceed 1");
  if (x_min < 1) throw InputError("x_min must be at least 1");
  const auto tail = sorted_tail(samples, x_min);
  if (tail.empty()) throw InputError("no samples at or above x_min");
  return ks_sorted(tail, alpha, x_min, std::numeric_limits<double>::infinity());
}

PowerLawFit fit_power_law(std::span<const Size> samples) {
  if (samples.empty()) throw InputError("no samples to fit");
  if (std::all_of(samples.begin(), samples.end(), [&](Size x) { return x == samples[0]; })) {
    throw DegenerateData("all samples are equal");
  }
  for (auto x : samples) {
    if (x < 0) throw InputError("samples must be non-negative");
  }
  const auto positive = sorted_tail(samples, 1);
  if (positive.size() < kMinFitSamples) {
    throw InputError("need at least " + std::to_string(kMinFitSamples) + " positive samples, got " +
                     std::to_string(positive.size()));
  }
  if (positive.front() == positive.back()) throw DegenerateData("all positive samples are equal");

  // Suffix sums of log x give each candidate's likelihood in O(1).
  std::vector<double> suffix_log(positive.size() + 1, 0.0);
  for (std::size_t k = positive.size(); k-- > 0;) {
    suffix_log[k] = suffix_log[k + 1] + std::log(static_cast<double>(positive[k]));
  }

  PowerLawFit best;
  best.ks = std::numeric_limits<double>::infinity();
  std::size_t k = 0;
  while (k < positive.size()) {
    const Size x_min = positive[k];
    if (x_min == positive.back()) break;
    const std::span<const Size> tail(positive.begin() + static_cast<std::ptrdiff_t>(k), positive.end());
    const double alpha = alpha_mle(tail.size(), suffix_log[k], x_min);
    const double d = ks_sorted(tail, alpha, x_min, best.ks);
    if (d < best.ks) {
      best.x_min = x_min;
      best.alpha = alpha;
      best.ks = d;
      best.n_tail = tail.size();
    }
    while (k < positive.size() && positive[k] == x_min) ++k;
  }
  if (best.n_tail < kMinTailSamples) {
    best.warning = "only " + std::to_string(best.n_tail) + " samples at or above x_min";
  }
  return best;
}

LrtResult likelihood_ratio_test(std::span<const double> log_ratio, Alternative alternative) {
  if (log_ratio.empty()) throw InputError("empty log-likelihood ratio vector");
  const auto n = static_cast<double>(log_ratio.size());
  const double r = std::accumulate(log_ratio.begin(), log_ratio.end(), 0.0);
  const double mean = r / n;
  double var = 0;
  for (auto d : log_ratio) var += (d - mean) * (d - mean);
  var /= n;
  double p;
  if (var > 0) {
    p = std::erfc(std::abs(r) / std::sqrt(2 * n * var));
  } else {
    p = r == 0 ? 1.0 : 0.0;
  }
  return {alternative, r, std::clamp(p, 0.0, 1.0)};
}

LrtResult loglikelihood_ratio(std::span<const Size> samples, const PowerLawFit& fit,
                              Alternative alternative) {
  if (!(fit.alpha > 1) || fit.x_min < 1) throw InputError("invalid power-law fit");
  const auto tail = sorted_tail(samples, fit.x_min);
  if (tail.size() < kMinTailSamples) {
    throw InputError("need at least " + std::to_string(kMinTailSamples) +
                     " tail samples for the likelihood ratio test");
  }
  const double log_norm = std::log(hurwitz_zeta(fit.alpha, static_cast<double>(fit.x_min)));
  std::vector<double> ratio(tail.size());
  for (std::size_t k = 0; k < tail.size(); ++k) {
    ratio[k] = -fit.alpha * std::log(static_cast<double>(tail[k])) - log_norm;
  }

  if (alternative == Alternative::Exponential) {
    double excess = 0;
    for (auto x : tail) excess += static_cast<double>(x - fit.x_min);
    excess /= static_cast<double>(tail.size());
    // Geometric law on x_min, x_min + 1, ...; all mass on x_min if no excess.
    if (excess > 0) {
      const double lambda = std::log1p(1 / excess);
      const double log_head = std::log(-std::expm1(-lambda));
      for (std::size_t k = 0; k < tail.size(); ++k) {
        ratio[k] -= log_head - lambda * static_cast<double>(tail[k] - fit.x_min);
      }
    }
  } else {
    const auto [mu, sigma] = fit_lognormal(tail, fit.x_min);
    const double log_tail_mass =
        std::log(normal_sf((std::log(static_cast<double>(fit.x_min)) - mu) / sigma));
    for (std::size_t k = 0; k < tail.size(); ++k) {
      ratio[k] -= lognormal_log_pmf(tail[k], mu, sigma, log_tail_mass);
    }
  }
  return likelihood_ratio_test(ratio, alternative);
}

std::vector<std::pair<Size, double>> survival_histogram(std::span<const Size> samples) {
  if (samples.empty()) throw InputError("no samples");
  std::map<Size, std::size_t> counts;
  for (auto x : samples) ++counts[x];
  std::vector<std::pair<Size, double>> out;
  out.reserve(counts.size());
  const auto n = static_cast<double>(samples.size());
  for (const auto& [x, c] : counts) out.emplace_back(x, static_cast<double>(c) / n);
  return out;
}

PowerLawSampler::PowerLawSampler(double alpha, Size x_min) : alpha_(alpha), x_min_(x_min) {
  if (!(alpha > 1) || x_min < 1) throw InputError("power law needs alpha > 1 and x_min >= 1");
  norm_ = hurwitz_zeta(alpha, static_cast<double>(x_min));
}

double PowerLawSampler::survival(Size x) const {
  return hurwitz_zeta(alpha_, static_cast<double>(x)) / norm_;
}

Size PowerLawSampler::quantile(double u) const {
  constexpr Size kCap = Size{1} << 62;
  Size lo = x_min_;  // survival(lo) >= u
  Size step = 1;
  Size hi = x_min_ + step;
  while (survival(hi) >= u) {
    lo = hi;
    if (hi >= kCap / 2) return kCap;
    step *= 2;
    hi = x_min_ + step;
  }
  while (hi - lo > 1) {
    const Size mid = lo + (hi - lo) / 2;
    (survival(mid) >= u ? lo : hi) = mid;
  }
  return lo;
}

Size PowerLawSampler::operator()(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return quantile(1.0 - unit(rng));
}

double bootstrap_p_value(std::span<const Size> samples, const PowerLawFit& fit,
                         std::size_t resamples, std::uint64_t seed) {
  if (resamples == 0) throw InputError("bootstrap needs at least one resample");
  const auto positive = sorted_tail(samples, 1);
  std::vector<Size> body;
  for (auto x : positive) {
    if (x < fit.x_min) body.push_back(x);
  }
  const double tail_share = static_cast<double>(positive.size() - body.size()) /
                            static_cast<double>(positive.size());
  const PowerLawSampler sampler(fit.alpha, fit.x_min);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, body.empty() ? 0 : body.size() - 1);
  std::size_t valid = 0;
  std::size_t exceed = 0;
  std::vector<Size> synthetic(positive.size());
  for (std::size_t b = 0; b < resamples; ++b) {
    for (auto& x : synthetic) {
      x = body.empty() || unit(rng) < tail_share ? sampler(rng) : body[pick(rng)];
    }
    try {
      const auto refit = fit_power_law(synthetic);
      ++valid;
      if (refit.ks >= fit.ks) ++exceed;
    } catch (const InputError&) {
      // A degenerate synthetic set has no fit; it is left out of the ratio.
    }
  }
  if (valid == 0) throw InputError("no bootstrap resample could be fitted");
  return static_cast<double>(exceed) / static_cast<double>(valid);
}

}  // namespace evosand
