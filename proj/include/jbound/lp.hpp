#pragma once

#include <optional>
#include <vector>

#include "jbound/query.hpp"
#include "jbound/rational.hpp"

namespace jbound {

// The covering LP of a query: minimise sum_R c_R * x_R subject to
// sum_{R : a in A_R} x_R >= 1 for every attribute a, x >= 0. Unit costs give
// the fractional edge cover number rho*; costs log2(N_R) give the
// size-constrained bound.
struct CoverLp {
  const JoinQuery* query;
  std::vector<Rational> costs;  // one per relation, schema order, >= 0
};

// Optimal primal/dual pair with exactly equal objectives. Both vectors come
// out of one simplex tableau, so complementary slackness holds exactly.
struct CoverSolution {
  std::vector<Rational> x;  // per relation, schema order
  std::vector<Rational> y;  // per attribute, universe order
  Rational objective;
  std::optional<Rational> rho_star;  // set when costs are all ones
};

// Exact rational simplex with Bland's rule. Deterministic given input order.
// Precondition: every attribute appears in some relation.
CoverSolution solve_cover_lp(const CoverLp& lp);
CoverSolution solve_cover_lp(const JoinQuery& q);  // unit costs

bool is_fractional_cover(const JoinQuery& q, const std::vector<Rational>& x);
bool is_dual_feasible(const JoinQuery& q, const std::vector<Rational>& y,
                      const std::vector<Rational>& costs);

// True iff every relation with x_R > 0 has a tight dual constraint
// sum_{a in A_R} y_a = c_R. Throws domain_error when (x, y) is not a
// feasible primal/dual pair.
bool check_complementary_slackness(const CoverLp& lp, const CoverSolution& sol);

struct EdgeCover {
  std::vector<int> relations;  // indices into the schema, ascending
  size_t size() const { return relations.size(); }
};

// Minimum-cardinality integral edge cover by exhaustive search; ties broken
// by lexicographic relation order. Requires m <= 20.
EdgeCover min_edge_cover(const JoinQuery& q);

// Greedy set cover: repeatedly pick the relation covering the most uncovered
// attributes, ties by schema order.
EdgeCover greedy_edge_cover(const JoinQuery& q);

}  // namespace jbound
