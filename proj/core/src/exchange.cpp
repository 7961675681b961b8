#include "ecotherm/exchange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ecotherm/error.hpp"

namespace ecotherm {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double compensated_sum(std::span<const double> v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double t = sum + x;
    comp += std::fabs(sum) >= std::fabs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

std::string rule_name(const ExchangeRule& rule) {
  struct {
    std::string operator()(const UniformPair&) const { return "uniform_pair"; }
    std::string operator()(const FixedTransfer&) const { return "fixed_transfer"; }
    std::string operator()(const MultiplicativeSave&) const { return "multiplicative_save"; }
  } name;
  return std::visit(name, rule);
}

void validate(const ExchangeRule& rule) {
  if (const auto* f = std::get_if<FixedTransfer>(&rule); f && !(f->delta > 0.0))
    throw Error("fixed_transfer requires delta > 0");
  if (const auto* m = std::get_if<MultiplicativeSave>(&rule);
      m && !(m->saving >= 0.0 && m->saving <= 1.0))
    throw Error("multiplicative_save requires saving in [0, 1]");
}

std::pair<double, double> apply_exchange(const ExchangeRule& rule, double mi, double mj, double eps) {
  if (std::holds_alternative<UniformPair>(rule)) {
    const double pool = mi + mj;
    const double new_i = eps * pool;
    return {new_i, pool - new_i};
  }
  if (const auto* f = std::get_if<FixedTransfer>(&rule)) {
    if (mi < f->delta) return {mi, mj};
    return {mi - f->delta, mj + f->delta};
  }
  const double s = std::get<MultiplicativeSave>(rule).saving;
  const double pool = (1.0 - s) * (mi + mj);
  const double share = eps * pool;
  return {s * mi + share, s * mj + (pool - share)};
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r = 0;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

Ensemble init_ensemble(std::size_t N, double total_M, std::uint64_t seed, InitMode init,
                       ExchangeRule rule) {
  if (N < 2) throw Error("ensemble needs N >= 2 agents");
  if (!(total_M > 0.0) || !std::isfinite(total_M)) throw Error("ensemble needs total_M > 0");
  validate(rule);

  Ensemble e;
  e.total_M = total_M;
  e.rule = rule;
  e.rng_seed = seed;
  e.rng = Rng(seed, 0);
  e.holdings.assign(N, total_M / static_cast<double>(N));
  if (init == InitMode::random) {
    Rng init_rng(seed, 1);
    for (double& h : e.holdings) h = init_rng.uniform01();
    const double weight = compensated_sum(e.holdings);
    for (double& h : e.holdings) h = total_M * (h / weight);
    // Absorb the rounding remainder in the largest holding.
    auto largest = std::max_element(e.holdings.begin(), e.holdings.end());
    *largest = 0.0;
    *largest = std::max(0.0, total_M - compensated_sum(e.holdings));
  }
  return e;
}

Ensemble run(Ensemble e, std::uint64_t n_steps) {
  const std::uint64_t n = e.holdings.size();
  for (std::uint64_t step = 0; step < n_steps; ++step) {
    const std::uint64_t i = e.rng.below(n);
    std::uint64_t j = e.rng.below(n - 1);
    if (j >= i) ++j;
    const double eps = std::holds_alternative<FixedTransfer>(e.rule) ? 0.0 : e.rng.uniform01();
    auto [mi, mj] = apply_exchange(e.rule, e.holdings[i], e.holdings[j], eps);
    e.holdings[i] = mi;
    e.holdings[j] = mj;
  }
  e.steps_done += n_steps;
  return e;
}

double conservation_drift(const Ensemble& e) {
  return std::fabs(compensated_sum(e.holdings) - e.total_M);
}

FitResult fit_boltzmann(std::span<const double> holdings) {
  if (holdings.empty()) throw Error("cannot fit an empty ensemble");
  FitResult fit;
  const double n = static_cast<double>(holdings.size());
  fit.T_hat = compensated_sum(holdings) / n;
  if (!(fit.T_hat > 0.0)) throw Error("cannot fit an ensemble with zero total");

  auto [lo, hi] = std::minmax_element(holdings.begin(), holdings.end());
  fit.degenerate = *lo == *hi;

  std::vector<double> sorted(holdings.begin(), holdings.end());
  std::sort(sorted.begin(), sorted.end());
  double d = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const double cdf = -std::expm1(-sorted[k] / fit.T_hat);
    d = std::max({d, (static_cast<double>(k) + 1.0) / n - cdf, cdf - static_cast<double>(k) / n});
  }
  fit.ks_stat = std::clamp(d, 0.0, 1.0);

  if (sorted.size() >= 100) {
    const std::size_t k = std::max<std::size_t>(10, sorted.size() / 100);
    const double threshold = sorted[sorted.size() - 1 - k];
    if (threshold > 0.0) {
      double sum = 0.0;
      for (std::size_t r = 0; r < k; ++r) sum += std::log(sorted[sorted.size() - 1 - r] / threshold);
      if (sum > 0.0) fit.tail_alpha = static_cast<double>(k) / sum;
    }
  }
  return fit;
}

std::vector<HistogramBin> histogram(std::span<const double> holdings, std::size_t n_bins) {
  if (holdings.empty()) throw Error("histogram of an empty ensemble");
  if (n_bins == 0) throw Error("histogram needs at least one bin");
  const double top = *std::max_element(holdings.begin(), holdings.end());
  if (!(top > 0.0)) throw Error("histogram needs a positive maximum holding");
  const double width = top / static_cast<double>(n_bins);

  std::vector<HistogramBin> bins(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    bins[k].lo = width * static_cast<double>(k);
    bins[k].hi = k + 1 == n_bins ? top : width * static_cast<double>(k + 1);
  }
  for (double h : holdings) {
    auto k = static_cast<std::size_t>(h / width);
    ++bins[std::min(k, n_bins - 1)].count;
  }
  const double n = static_cast<double>(holdings.size());
  for (auto& b : bins) b.density = static_cast<double>(b.count) / (n * (b.hi - b.lo));
  return bins;
}

double empirical_entropy(std::span<const double> holdings, std::size_t n_bins) {
  if (n_bins < 10) throw Error("empirical_entropy needs at least 10 bins");
  const double n = static_cast<double>(holdings.size());
  double s = 0.0;
  for (const auto& b : histogram(holdings, n_bins)) {
    if (b.count == 0) continue;
    const double p = static_cast<double>(b.count) / n;
    s -= p * std::log(p / (b.hi - b.lo));
  }
  return s;
}

}  // namespace ecotherm
