#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "jbound/query.hpp"
#include "jbound/relation.hpp"

namespace jbound {

struct Plan;
using PlanPtr = std::shared_ptr<const Plan>;

// Ordered binary term of joins and projections over relation leaves.
// Equality is structural (left/right distinguished). `unit` is the join
// identity, a 0-ary relation holding the empty tuple; it only appears as
// rewriting bookkeeping and is stripped from final plans.
struct Plan {
  enum class Kind { leaf, join, project, unit };

  Kind kind;
  std::string relation;                     // leaf
  PlanPtr left, right;                      // join children; project child in `left`
  std::vector<std::string> project_attrs;   // project target B

  static PlanPtr make_leaf(std::string name);
  static PlanPtr make_join(PlanPtr l, PlanPtr r);
  static PlanPtr make_project(std::vector<std::string> attrs, PlanPtr child);
  static PlanPtr make_unit();
};

bool plans_equal(const Plan& a, const Plan& b);

// Text format: `(join X Y)`, `(project (a b c) X)`, `(unit)`, bare relation
// names as leaves. print/parse round-trip.
std::string print_plan(const Plan& p);
PlanPtr parse_plan(const std::string& text, const std::string& filename = "<plan>");

struct PlanStats {
  size_t leaf_count = 0;        // unit nodes do not count as leaves
  size_t projection_count = 0;  // 0 characterises a join plan
  size_t depth = 0;
};
PlanStats plan_stats(const Plan& p);

// Output attribute set A_phi in universe order. Validates the plan against
// the schema: leaves must name schema relations and every projection target
// must be a subset of its child's attributes.
std::vector<std::string> output_attributes(const Plan& p, const JoinQuery& q);

// The generic join-project plan: with B_i the first i attributes of `order`,
// stage i joins the projections of every relation onto B_i (intersected with
// its attributes) into the previous stage. The final stage computes Q.
PlanPtr gm_plan(const JoinQuery& q, const std::vector<std::string>& order);
PlanPtr gm_plan(const JoinQuery& q);  // order = universe order

// All n stage roots (the last one is the full plan); the stages share
// structure, so stage pointers can be matched against evaluation traces.
std::vector<PlanPtr> gm_stage_plans(const JoinQuery& q, const std::vector<std::string>& order);

// Projection-free left-deep plan: greedy-cover relations first (schema
// order), then the remaining relations (schema order).
PlanPtr cover_join_plan(const JoinQuery& q);

// Hard family for join-only plans: 2m relations of arity n/2 over the
// attributes a_s indexed by the m-subsets s of [2m]; each instance tuple has
// one coordinate in [N] (1-based) and 1 elsewhere.
struct AdversarialFamily {
  JoinQuery query;
  Instance instance;
};
AdversarialFamily adversarial_instance(int m, uint64_t n_values,
                                       uint64_t tuple_budget = 10'000'000);

// All projection-free binary trees using each relation exactly once; the
// count is Catalan(m-1) * m!. Requires m <= 5.
std::vector<PlanPtr> enumerate_join_plans(const JoinQuery& q);

// Node of a leaf-coloured binary tree (2m distinct colours) whose descendant
// leaves span at least ceil((m+2)/2) and at most m+1 colours; the
// minimum-height-node argument. Colours default to leaf relation names.
const Plan* balanced_split(const Plan& p);
const Plan* balanced_split(const Plan& p, const std::map<std::string, int>& colour_of_leaf);

}  // namespace jbound
