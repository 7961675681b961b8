#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ecotherm {

// Kinetic exchange of a conserved quantity among N agents.

// Pick two distinct agents, pool their holdings and split the pool at a
// uniform random fraction.
struct UniformPair {};
// Move a fixed amount from i to j when i can afford it.
struct FixedTransfer {
  double delta;
};
// Each agent keeps a fraction `saving` and the rest is pooled and split at a
// uniform random fraction.
struct MultiplicativeSave {
  double saving;
};

using ExchangeRule = std::variant<UniformPair, FixedTransfer, MultiplicativeSave>;

std::string rule_name(const ExchangeRule& rule);
// Throws Error when a parameter is out of range (delta <= 0, saving outside [0, 1]).
void validate(const ExchangeRule& rule);

// New holdings of the pair (i, j) given the uniform draw eps in [0, 1).
std::pair<double, double> apply_exchange(const ExchangeRule& rule, double mi, double mj, double eps);

// std::mt19937_64 seeded through SplitMix64 so that (seed, stream) pairs give
// independent, platform-stable streams. Draws are built from raw 64-bit
// outputs, not from <random> distributions, whose output is
// implementation-defined.
class Rng {
public:
  static constexpr const char* algorithm = "mt19937_64/splitmix64";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  double uniform01();                     // [0, 1), 53 random bits
  std::uint64_t below(std::uint64_t n);  // uniform on [0, n), n > 0

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

private:
  std::mt19937_64 engine_;
};

struct Ensemble {
  std::vector<double> holdings;
  double total_M = 0.0;
  ExchangeRule rule = UniformPair{};
  std::uint64_t rng_seed = 0;
  std::uint64_t steps_done = 0;
  Rng rng{0};
};

enum class InitMode { equal, random };

// Throws Error for N < 2, total_M <= 0 or an invalid rule.
Ensemble init_ensemble(std::size_t N, double total_M, std::uint64_t seed, InitMode init,
                       ExchangeRule rule = UniformPair{});

// Applies n_steps pairwise exchanges. Deterministic given the ensemble state.
Ensemble run(Ensemble ensemble, std::uint64_t n_steps);

// |sum(holdings) - total_M| with compensated summation.
double conservation_drift(const Ensemble& ensemble);

struct FitResult {
  double T_hat = 0.0;                // sample mean of the holdings
  double ks_stat = 0.0;              // sup |F_emp - (1 - exp(-m/T_hat))|
  std::optional<double> tail_alpha;  // Hill estimate on the top 1 % (N >= 100)
  bool degenerate = false;           // every holding identical
};

FitResult fit_boltzmann(std::span<const double> holdings);
inline FitResult fit_boltzmann(const Ensemble& e) { return fit_boltzmann(e.holdings); }

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double density = 0.0;  // count / (N * width)
};

// n_bins equal-width bins over [0, max holding].
std::vector<HistogramBin> histogram(std::span<const double> holdings, std::size_t n_bins);

// Histogram estimate of the differential entropy, -sum p_k ln(p_k / w_k).
// Throws Error for an empty sample or n_bins < 10.
double empirical_entropy(std::span<const double> holdings, std::size_t n_bins);
inline double empirical_entropy(const Ensemble& e, std::size_t n_bins) {
  return empirical_entropy(e.holdings, n_bins);
}

}  // namespace ecotherm
