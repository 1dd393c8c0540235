#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jbound/plan.hpp"
#include "jbound/query.hpp"
#include "jbound/rational.hpp"
#include "jbound/relation.hpp"
#include "jbound/stochastic.hpp"

namespace jbound {

// Context for the submodular potential
//   f_S(A) = |A| * (log2 N - n - 1) - sum of w_R over R in S with A_R inside A,
// where n is the attribute count of the whole query. N must be a power of
// two so the coefficient stays an exact integer.
struct ClosureContext {
  const JoinQuery* query = nullptr;
  std::vector<int> s;              // relation indices forming S
  std::vector<Rational> weights;   // per schema relation
  uint64_t domain_size = 0;        // N = 2^k
  long log2_domain = 0;            // k
};

ClosureContext make_closure_context(const JoinQuery& q, const std::vector<Rational>& weights,
                                    uint64_t domain_size, std::vector<int> s_relations);

Rational f_value(const ClosureContext& ctx, uint32_t attr_mask);
Rational f_value(const ClosureContext& ctx, const std::vector<std::string>& attrs);

// The unique superset of A with minimal f_S, of maximal size among the
// minimizers. Exhaustive superset scan (universe limited to 22 attributes);
// the scan doubles as a uniqueness check and raises internal_error if the
// submodularity consequence ever failed.
struct ClosureResult {
  uint32_t mask = 0;
  std::vector<std::string> attributes;  // universe order
  Rational f;
  bool unique = false;  // witness that the max-size minimizer was unique
};

ClosureResult closure(const ClosureContext& ctx, uint32_t a_mask);
ClosureResult closure(const ClosureContext& ctx, const std::vector<std::string>& attrs);

uint32_t attribute_mask(const JoinQuery& q, const std::vector<std::string>& attrs);

// Wraps a plan with a left-deep join of every schema relation, so that later
// interior rewrites cannot change the computed query.
PlanPtr normalize_plan(PlanPtr phi, const JoinQuery& q);

// Extended schema used during rewriting: the original relations plus one
// zero-weight dummy unary relation per attribute (its sampled contents are
// always the full domain column).
struct DeprojectSetup {
  JoinQuery extended_query;
  std::vector<Rational> extended_weights;
  uint64_t domain_size = 0;
  size_t original_relations = 0;

  bool is_dummy(size_t relation_index) const { return relation_index >= original_relations; }
  const std::string& dummy_name(size_t attribute_index) const;

  // The instance extended with the full dummy columns, for evaluating
  // intermediate plans.
  Instance extend_instance(const Instance& d) const;

  std::vector<std::string> dummy_names;  // per attribute
};

DeprojectSetup make_deproject_setup(const JoinQuery& q, const ProbabilityModel& model);

// One round of projection removal on a normalized plan: pick the
// lowest-leftmost projection pi_A(phi0) with projection-free phi0, widen A to
// its closure A*, drop the relations of phi0 not inside A* (replaced by the
// 0-ary unit), join in the dummy relation of every attribute of A*, and
// erase the now-redundant projection. Requires at least one projection.
PlanPtr eliminate_once(PlanPtr normalized, const DeprojectSetup& setup);

// Removes unit leaves and dummy-relation leaves; only meaningful on
// projection-free plans.
PlanPtr strip_placeholders(PlanPtr plan, const DeprojectSetup& setup);

struct DeprojectResult {
  PlanPtr plan;
  size_t iterations = 0;
};

// Full pipeline: normalize, eliminate projections one by one (at most
// projection-count iterations), strip the bookkeeping leaves. A plan that is
// already projection-free is returned unchanged.
DeprojectResult deproject(PlanPtr phi, const JoinQuery& q, const ProbabilityModel& model);

struct InflationReport {
  double original_max_expected = 0.0;   // max over subplans of mean |psi(D)|
  double rewritten_max_expected = 0.0;
  double ratio = 1.0;
  double ratio_low = 1.0;   // crude confidence band from per-subplan std errors
  double ratio_high = 1.0;
  uint64_t trials = 0;
};

// Monte-Carlo estimate of the max-over-subplans expected size for both
// plans. When both maxima fall below one tuple the ratio is defined as 1.
InflationReport inflation_report(const Plan& phi, const Plan& phi_star, const JoinQuery& q,
                                 const ProbabilityModel& model, uint64_t trials, uint64_t seed,
                                 uint64_t tuple_budget = kDefaultTupleBudget);

}  // namespace jbound
