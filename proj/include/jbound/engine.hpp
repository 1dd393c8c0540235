#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jbound/plan.hpp"
#include "jbound/query.hpp"
#include "jbound/relation.hpp"

namespace jbound {

inline constexpr uint64_t kDefaultTupleBudget = 10'000'000;
inline constexpr uint64_t kDefaultOracleBudget = 100'000'000;

// Natural join on the shared attributes; degenerates to a Cartesian product
// when the attribute sets are disjoint. Output attribute order: left's
// attributes, then right's new attributes. The smaller side is hashed.
// Throws capacity_error when the output would exceed the budget (the exact
// output size is counted before materialising).
Relation join(const Relation& left, const Relation& right,
              uint64_t tuple_budget = kDefaultTupleBudget);

// Duplicate-eliminated projection; attribute order inherited from the input.
Relation project(const Relation& r, const std::vector<std::string>& target);

struct TraceEntry {
  const Plan* node;
  std::string label;  // printed subplan
  uint64_t cardinality;
  uint32_t arity;
};

struct EvalTrace {
  std::vector<TraceEntry> entries;  // one per subplan, evaluation (post) order
  uint64_t peak_cardinality = 0;

  const TraceEntry* find(const Plan* node) const;
};

// Bottom-up plan evaluation with a per-subplan trace.
std::pair<Relation, EvalTrace> evaluate(const Plan& plan, const JoinQuery& q,
                                        const Instance& d,
                                        uint64_t tuple_budget = kDefaultTupleBudget);

// Reference semantics, independent of the join machinery: enumerate all
// universe tuples over the per-attribute active domains and keep those whose
// projections land in every relation. Budget caps the candidate count.
Relation oracle_answer(const JoinQuery& q, const Instance& d,
                       uint64_t candidate_budget = kDefaultOracleBudget);

}  // namespace jbound
