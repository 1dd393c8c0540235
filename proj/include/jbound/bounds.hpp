#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "jbound/engine.hpp"
#include "jbound/lp.hpp"
#include "jbound/query.hpp"
#include "jbound/rational.hpp"
#include "jbound/relation.hpp"

namespace jbound {

// prod_R size_R ^ x_R, as a float plus an exact base-2 logarithm when every
// size is a power of two.
struct BoundValue {
  struct Factor {
    std::string relation;
    uint64_t size;
    Rational exponent;
  };

  std::optional<Rational> log2_value;
  double value = 0.0;
  std::vector<Factor> factors;
};

// Requires x to be a fractional edge cover of q (verified).
BoundValue agm_bound(const JoinQuery& q, const std::vector<Rational>& x,
                     const std::vector<uint64_t>& sizes);

// Extremal instance certifying the cover bound: with the optimal dual
// y_a = p_a / q and N = n0^q, relation R holds the full grid of tuples with
// t(a) in [n0^{p_a}]. All relations with x_R > 0 get equal size N, and
// |Q(D)| >= prod_R |R(D)|^{x_R} exactly.
struct WorstCaseInstance {
  Instance instance;
  CoverSolution solution;
  unsigned long denominator;        // q, the common dual denominator
  mpz_class grid_side;              // N = n0^q
  std::vector<mpz_class> widths;    // per attribute, n0^{p_a}
};
WorstCaseInstance worst_case_instance(const JoinQuery& q, uint64_t n0,
                                      uint64_t tuple_budget = kDefaultTupleBudget);

// log2(n) as an exact integer when n is a power of two; otherwise the exact
// rational value of the double log2(n), with *exact set accordingly.
Rational log2_cost(uint64_t n, bool* exact = nullptr);

// Solves the size-constrained cover LP (costs log2 N_R) and returns the
// bound prod_R N_R^{x_R}.
std::pair<CoverSolution, BoundValue> constrained_bound(const JoinQuery& q,
                                                       const std::vector<uint64_t>& sizes);

// Instance with |R(D)| = N_R exactly and |Q(D)| >= 2^{-n} prod_R N_R^{x_R}:
// grid widths floor(2^{y_a}) from the dual, padded deterministically (the
// lexicographically smallest missing tuples over an initial segment of
// values, extended past the grid when needed).
struct ConstrainedWorstInstance {
  Instance instance;
  CoverSolution solution;
  std::vector<mpz_class> widths;  // per attribute, floor(2^{y_a})
};
ConstrainedWorstInstance constrained_worst_instance(const JoinQuery& q,
                                                    const std::vector<uint64_t>& sizes,
                                                    uint64_t tuple_budget = kDefaultTupleBudget);

// Simple graph; file format: lines `edge <u> <v>`, '#' comments. No
// self-loops or duplicate edges.
struct GraphInput {
  std::vector<std::string> vertices;       // first-appearance order
  std::vector<std::pair<int, int>> edges;  // vertex indices, file order

  static GraphInput parse(const std::string& text, const std::string& filename = "<graph>");

  int vertex_index(const std::string& name) const;
  bool is_independent(const std::vector<int>& vertex_set) const;
  // alpha(G) by exhaustive search; vertices limited to 30.
  int independence_number() const;
  // A maximum independent set witnessing alpha(G), deterministic.
  std::vector<int> maximum_independent_set() const;
};

// One attribute per vertex, one binary relation per edge, all size
// constraints 2. The primal graph of the result is the input graph.
std::pair<JoinQuery, std::vector<uint64_t>> graph_to_query(const GraphInput& g);

// Witness instance for an independent set I: every relation holds the all-0
// tuple; a relation meeting I in {a} also holds the tuple that is 1 at a and
// 0 elsewhere; relations not meeting I are padded with the all-2 tuple so
// that every relation has exactly 2 tuples. Guarantees |Q(D)| >= 2^{|I|}.
// Aligned with graph_to_query(g).
Instance independent_set_instance(const GraphInput& g, const std::vector<std::string>& witness);

}  // namespace jbound
