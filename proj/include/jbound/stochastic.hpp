#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jbound/engine.hpp"
#include "jbound/query.hpp"
#include "jbound/rational.hpp"
#include "jbound/relation.hpp"

namespace jbound {

// Random database model D(N, p): every tuple of [N]^{A_R} enters R(D)
// independently with probability p_R = 2^{-w_R}. Weights are kept exact;
// probabilities become floats only at sampling time.
struct ProbabilityModel {
  std::vector<Rational> weights;  // w_R >= 0, schema order
  uint64_t domain_size = 0;       // N

  // Model file format (.model): lines `weight <rel> <p>/<q>` and a single
  // `N <int>`; '#' comments; missing weights default to 1.
  static ProbabilityModel parse(const JoinQuery& q, const std::string& text,
                                const std::string& filename = "<model>");

  double probability(size_t relation) const;  // 2^{-w_R}
};

struct ExpectedSize {
  std::optional<Rational> log2_exact;  // n*log2(N) - sum w_R, when N = 2^k
  double value = 0.0;
};

// E[X] = N^n * prod p_R.
ExpectedSize expected_answer_size(const JoinQuery& q, const ProbabilityModel& model);

// Density of the subquery induced by B: (sum of w_R over relations with all
// attributes inside B) / |B|.
Rational subset_density(const JoinQuery& q, const std::vector<Rational>& weights,
                        const std::vector<std::string>& b);

struct DensityReport {
  std::vector<std::string> best_attributes;  // witness B, universe order
  Rational max_density;
  // Filled by the brute-force method for small universes.
  std::optional<std::vector<std::pair<std::vector<std::string>, Rational>>> per_subset;
};

// Exact maximum density by scanning all non-empty attribute subsets; ties
// broken toward larger |B|, then lexicographically. Requires n <= 22.
DensityReport max_density_bruteforce(const JoinQuery& q, const std::vector<Rational>& weights);

// Flow network for the density test: source -> a with capacity delta,
// a -> R (a in A_R) with effectively infinite capacity, R -> sink with
// capacity w_R. The min-cut value gamma satisfies gamma < sum w_R iff the
// maximum density exceeds delta.
struct FlowNetwork {
  struct Arc {
    int to;
    Rational residual;
    int reverse;  // index of the reverse arc in adj[to]
  };

  int source = 0, sink = 0;
  std::vector<std::vector<Arc>> adj;

  void add_arc(int from, int to, const Rational& capacity);
  Rational max_flow();                     // Edmonds-Karp, exact rationals
  std::vector<char> source_side() const;   // residual reachability after max_flow
};

FlowNetwork build_density_network(const JoinQuery& q, const std::vector<Rational>& weights,
                                  const Rational& delta);

// gamma(Q, w, delta): exact min-cut value of the density network.
Rational min_cut_capacity(const JoinQuery& q, const std::vector<Rational>& weights,
                          const Rational& delta);

// Maximum density via binary search on the cut criterion, snapped to the
// unique rational with denominator at most n * lcm(weight denominators).
DensityReport max_density_flow(const JoinQuery& q, const std::vector<Rational>& weights);

// E[X]^2 * (2^n - 1) * 2^{maxdensity - log2 N}; nullopt when
// maxdensity > log2 N (the bound does not apply).
std::optional<double> variance_upper_bound(const JoinQuery& q, const ProbabilityModel& model);

uint64_t splitmix64(uint64_t x);

// Independent Bernoulli(p_R) per candidate tuple; deterministic given
// (seed, schema order). Per-relation stream seeded from seed xor the
// relation index, remixed.
Instance sample_instance(const JoinQuery& q, const ProbabilityModel& model, uint64_t seed,
                         uint64_t tuple_budget = kDefaultTupleBudget);

struct ConcentrationReport {
  uint64_t trials = 0;
  double empirical_mean = 0.0;
  double empirical_variance = 0.0;  // sample variance
  double predicted_mean = 0.0;
  std::optional<double> variance_bound;
  double empty_fraction = 0.0;
  Rational max_density;
  double log2n_minus_density = 0.0;  // positive: sparse regime; negative: dense
};

ConcentrationReport concentration_experiment(const JoinQuery& q, const ProbabilityModel& model,
                                             uint64_t trials, uint64_t seed,
                                             uint64_t tuple_budget = kDefaultTupleBudget);

}  // namespace jbound
