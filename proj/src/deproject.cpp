#include "jbound/deproject.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "jbound/engine.hpp"
#include "jbound/errors.hpp"

namespace jbound {

uint32_t attribute_mask(const JoinQuery& q, const std::vector<std::string>& attrs) {
  if (q.attribute_count() > 22)
    throw capability_error("closure machinery limited to 22 attributes");
  uint32_t mask = 0;
  for (const auto& a : attrs) {
    const int i = q.attribute_index(a);
    if (i < 0) throw domain_error("attribute outside universe: " + a);
    mask |= uint32_t{1} << i;
  }
  return mask;
}

namespace {

std::vector<std::string> mask_to_attrs(const JoinQuery& q, uint32_t mask) {
  std::vector<std::string> out;
  for (size_t a = 0; a < q.attribute_count(); ++a)
    if (mask >> a & 1) out.push_back(q.attributes()[a]);
  return out;
}

uint32_t relation_mask32(const JoinQuery& q, size_t r) {
  uint32_t m = 0;
  for (int a : q.relation_attribute_indices(r)) m |= uint32_t{1} << a;
  return m;
}

}  // namespace

ClosureContext make_closure_context(const JoinQuery& q, const std::vector<Rational>& weights,
                                    uint64_t domain_size, std::vector<int> s_relations) {
  if (weights.size() != q.relation_count())
    throw domain_error("closure context needs one weight per relation");
  const auto k = exact_log2_u64(domain_size);
  if (!k || *k < 1) throw domain_error("closure context requires N to be a power of two, N >= 2");
  if (q.attribute_count() > 22)
    throw capability_error("closure machinery limited to 22 attributes");
  for (int r : s_relations)
    if (r < 0 || static_cast<size_t>(r) >= q.relation_count())
      throw domain_error("closure context references an unknown relation");
  ClosureContext ctx;
  ctx.query = &q;
  ctx.s = std::move(s_relations);
  ctx.weights = weights;
  ctx.domain_size = domain_size;
  ctx.log2_domain = static_cast<long>(*k);
  return ctx;
}

Rational f_value(const ClosureContext& ctx, uint32_t attr_mask) {
  const JoinQuery& q = *ctx.query;
  const long n = static_cast<long>(q.attribute_count());
  const long coeff = ctx.log2_domain - n - 1;
  Rational out = Rational(__builtin_popcount(attr_mask)) * Rational(coeff);
  for (int r : ctx.s)
    if ((relation_mask32(q, r) & ~attr_mask) == 0) out -= ctx.weights[r];
  return out;
}

Rational f_value(const ClosureContext& ctx, const std::vector<std::string>& attrs) {
  return f_value(ctx, attribute_mask(*ctx.query, attrs));
}

ClosureResult closure(const ClosureContext& ctx, uint32_t a_mask) {
  const JoinQuery& q = *ctx.query;
  const uint32_t full = (q.attribute_count() == 32)
                            ? ~uint32_t{0}
                            : (uint32_t{1} << q.attribute_count()) - 1;
  if ((a_mask & ~full) != 0) throw domain_error("closure of attributes outside the universe");
  const uint32_t complement = full & ~a_mask;

  // Scan every superset of A; keep the minimal f, then the maximal size.
  bool first = true;
  Rational best_f;
  uint32_t best_mask = 0;
  int best_size = -1;
  int winners = 0;
  uint32_t sub = complement;
  while (true) {
    const uint32_t mask = a_mask | sub;
    const Rational f = f_value(ctx, mask);
    const int size = __builtin_popcount(mask);
    if (first || f < best_f) {
      first = false;
      best_f = f;
      best_mask = mask;
      best_size = size;
      winners = 1;
    } else if (f == best_f) {
      if (size > best_size) {
        best_mask = mask;
        best_size = size;
        winners = 1;
      } else if (size == best_size) {
        ++winners;
      }
    }
    if (sub == 0) break;
    sub = (sub - 1) & complement;
  }
  if (winners != 1)
    throw internal_error("closure minimizer of maximal size is not unique; "
                         "submodularity violated");
  ClosureResult out;
  out.mask = best_mask;
  out.attributes = mask_to_attrs(q, best_mask);
  out.f = best_f;
  out.unique = true;
  return out;
}

ClosureResult closure(const ClosureContext& ctx, const std::vector<std::string>& attrs) {
  return closure(ctx, attribute_mask(*ctx.query, attrs));
}

PlanPtr normalize_plan(PlanPtr phi, const JoinQuery& q) {
  if (!phi) throw domain_error("normalize_plan needs a plan");
  PlanPtr acc = std::move(phi);
  for (const auto& rel : q.relations())
    acc = Plan::make_join(std::move(acc), Plan::make_leaf(rel.name));
  return acc;
}

const std::string& DeprojectSetup::dummy_name(size_t attribute_index) const {
  return dummy_names.at(attribute_index);
}

Instance DeprojectSetup::extend_instance(const Instance& d) const {
  if (d.relations.size() != original_relations)
    throw domain_error("instance does not match the original schema");
  Instance out = d;
  for (size_t a = 0; a < dummy_names.size(); ++a) {
    std::vector<Tuple> column;
    column.reserve(domain_size);
    for (uint64_t v = 0; v < domain_size; ++v) column.push_back({v});
    out.relations.push_back(Relation::make(
        extended_query.relations()[original_relations + a].attributes, std::move(column)));
  }
  return out;
}

DeprojectSetup make_deproject_setup(const JoinQuery& q, const ProbabilityModel& model) {
  if (model.weights.size() != q.relation_count())
    throw domain_error("model does not match query schema");
  const auto k = exact_log2_u64(model.domain_size);
  if (!k || *k < 1)
    throw domain_error("projection elimination requires N to be a power of two, N >= 2");

  DeprojectSetup setup;
  setup.domain_size = model.domain_size;
  setup.original_relations = q.relation_count();
  std::vector<RelationSchema> rels = q.relations();
  for (const auto& a : q.attributes()) {
    std::string name = "_d_" + a;
    while (q.relation_index(name) >= 0) name += "_";
    setup.dummy_names.push_back(name);
    rels.push_back(RelationSchema{name, {a}});
  }
  setup.extended_query = JoinQuery::with_universe(std::move(rels), q.attributes());
  setup.extended_weights = model.weights;
  setup.extended_weights.resize(setup.extended_query.relation_count(), Rational(0));
  return setup;
}

namespace {

// The lowest-leftmost projection whose subtree contains no other projection.
// Depth-first, left before right; deeper candidates win, ties go to the
// first one encountered.
void find_target(const PlanPtr& p, size_t depth, const Plan** best, size_t* best_depth) {
  switch (p->kind) {
    case Plan::Kind::leaf:
    case Plan::Kind::unit:
      return;
    case Plan::Kind::join:
      find_target(p->left, depth + 1, best, best_depth);
      find_target(p->right, depth + 1, best, best_depth);
      return;
    case Plan::Kind::project: {
      if (plan_stats(*p->left).projection_count == 0) {
        if (*best == nullptr || depth > *best_depth) {
          *best = p.get();
          *best_depth = depth;
        }
      } else {
        find_target(p->left, depth + 1, best, best_depth);
      }
      return;
    }
  }
}

void collect_relations(const PlanPtr& p, const JoinQuery& q, std::set<int>* out) {
  switch (p->kind) {
    case Plan::Kind::leaf: {
      const int r = q.relation_index(p->relation);
      if (r < 0) throw domain_error("plan references unknown relation '" + p->relation + "'");
      out->insert(r);
      return;
    }
    case Plan::Kind::unit:
      return;
    case Plan::Kind::join:
      collect_relations(p->left, q, out);
      collect_relations(p->right, q, out);
      return;
    case Plan::Kind::project:
      collect_relations(p->left, q, out);
      return;
  }
}

PlanPtr drop_relations(const PlanPtr& p, const std::set<std::string>& victims) {
  switch (p->kind) {
    case Plan::Kind::leaf:
      return victims.count(p->relation) ? Plan::make_unit() : p;
    case Plan::Kind::unit:
      return p;
    case Plan::Kind::join:
      return Plan::make_join(drop_relations(p->left, victims),
                             drop_relations(p->right, victims));
    case Plan::Kind::project:
      return Plan::make_project(p->project_attrs, drop_relations(p->left, victims));
  }
  throw internal_error("unknown plan kind");
}

PlanPtr replace_node(const PlanPtr& p, const Plan* target, const PlanPtr& replacement) {
  if (p.get() == target) return replacement;
  switch (p->kind) {
    case Plan::Kind::leaf:
    case Plan::Kind::unit:
      return p;
    case Plan::Kind::join:
      return Plan::make_join(replace_node(p->left, target, replacement),
                             replace_node(p->right, target, replacement));
    case Plan::Kind::project:
      return Plan::make_project(p->project_attrs,
                                replace_node(p->left, target, replacement));
  }
  throw internal_error("unknown plan kind");
}

}  // namespace

PlanPtr eliminate_once(PlanPtr normalized, const DeprojectSetup& setup) {
  if (!normalized) throw domain_error("eliminate_once needs a plan");
  const JoinQuery& xq = setup.extended_query;

  const Plan* target = nullptr;
  size_t target_depth = 0;
  find_target(normalized, 0, &target, &target_depth);
  if (!target) throw domain_error("eliminate_once requires at least one projection");

  const PlanPtr phi0 = target->left;
  std::set<int> s;
  collect_relations(phi0, xq, &s);

  ClosureContext ctx = make_closure_context(
      xq, setup.extended_weights, setup.domain_size, std::vector<int>(s.begin(), s.end()));
  const ClosureResult star = closure(ctx, attribute_mask(xq, target->project_attrs));

  // Step 1: drop the relations of S outside S[A*] (0-ary unit keeps the
  // subplan correspondence), then join in the dummy of every attribute of
  // A*, which pins the subplan's attribute set to exactly A*.
  std::set<std::string> victims;
  for (int r : s)
    if ((relation_mask32(xq, r) & ~star.mask) != 0) victims.insert(xq.relations()[r].name);
  PlanPtr rewritten = drop_relations(phi0, victims);
  for (size_t a = 0; a < xq.attribute_count(); ++a)
    if (star.mask >> a & 1)
      rewritten = Plan::make_join(std::move(rewritten), Plan::make_leaf(setup.dummy_name(a)));

  // Step 2: widen pi_A to pi_{A*}; with the dummies joined the projection is
  // redundant and is erased.
  const auto attrs = output_attributes(*rewritten, xq);
  if (attrs != star.attributes)
    rewritten = Plan::make_project(star.attributes, std::move(rewritten));

  return replace_node(normalized, target, rewritten);
}

PlanPtr strip_placeholders(PlanPtr plan, const DeprojectSetup& setup) {
  if (!plan) return plan;
  switch (plan->kind) {
    case Plan::Kind::unit:
      return nullptr;
    case Plan::Kind::leaf: {
      const int r = setup.extended_query.relation_index(plan->relation);
      if (r >= 0 && setup.is_dummy(static_cast<size_t>(r))) return nullptr;
      return plan;
    }
    case Plan::Kind::join: {
      PlanPtr l = strip_placeholders(plan->left, setup);
      PlanPtr r = strip_placeholders(plan->right, setup);
      if (!l) return r;
      if (!r) return l;
      return Plan::make_join(std::move(l), std::move(r));
    }
    case Plan::Kind::project: {
      PlanPtr c = strip_placeholders(plan->left, setup);
      if (!c) throw internal_error("projection left without a child while stripping");
      return Plan::make_project(plan->project_attrs, std::move(c));
    }
  }
  throw internal_error("unknown plan kind");
}

DeprojectResult deproject(PlanPtr phi, const JoinQuery& q, const ProbabilityModel& model) {
  if (!phi) throw domain_error("deproject needs a plan");
  DeprojectResult out;
  const size_t projections = plan_stats(*phi).projection_count;
  if (projections == 0) {
    out.plan = std::move(phi);  // already a join plan
    return out;
  }
  const DeprojectSetup setup = make_deproject_setup(q, model);
  PlanPtr current = normalize_plan(std::move(phi), q);
  while (plan_stats(*current).projection_count > 0) {
    if (out.iterations >= projections)
      throw internal_error("projection elimination failed to terminate");
    current = eliminate_once(std::move(current), setup);
    ++out.iterations;
  }
  out.plan = strip_placeholders(std::move(current), setup);
  if (!out.plan) throw internal_error("stripping removed the whole plan");
  return out;
}

InflationReport inflation_report(const Plan& phi, const Plan& phi_star, const JoinQuery& q,
                                 const ProbabilityModel& model, uint64_t trials, uint64_t seed,
                                 uint64_t tuple_budget) {
  if (trials < 1) throw domain_error("inflation report needs at least one trial");

  struct Acc {
    std::vector<double> per_subplan_sum;
    std::vector<double> per_subplan_sumsq;
  };
  Acc orig, star;
  for (uint64_t t = 0; t < trials; ++t) {
    const uint64_t trial_seed = splitmix64(seed) + t;
    const Instance d = sample_instance(q, model, trial_seed, tuple_budget);
    for (int which = 0; which < 2; ++which) {
      const Plan& plan = which == 0 ? phi : phi_star;
      Acc& acc = which == 0 ? orig : star;
      const auto [answer, trace] = evaluate(plan, q, d, tuple_budget);
      (void)answer;
      if (acc.per_subplan_sum.empty()) {
        acc.per_subplan_sum.assign(trace.entries.size(), 0.0);
        acc.per_subplan_sumsq.assign(trace.entries.size(), 0.0);
      }
      for (size_t i = 0; i < trace.entries.size(); ++i) {
        const double c = static_cast<double>(trace.entries[i].cardinality);
        acc.per_subplan_sum[i] += c;
        acc.per_subplan_sumsq[i] += c * c;
      }
    }
  }

  auto max_mean = [&](const Acc& acc, double* stderr_out) {
    double best = 0.0, best_se = 0.0;
    for (size_t i = 0; i < acc.per_subplan_sum.size(); ++i) {
      const double mean = acc.per_subplan_sum[i] / static_cast<double>(trials);
      if (mean >= best) {
        best = mean;
        const double var =
            trials > 1 ? std::max(0.0, (acc.per_subplan_sumsq[i] -
                                        acc.per_subplan_sum[i] * mean) /
                                           static_cast<double>(trials - 1))
                       : 0.0;
        best_se = std::sqrt(var / static_cast<double>(trials));
      }
    }
    if (stderr_out) *stderr_out = best_se;
    return best;
  };

  InflationReport rep;
  rep.trials = trials;
  double se_orig = 0, se_star = 0;
  rep.original_max_expected = max_mean(orig, &se_orig);
  rep.rewritten_max_expected = max_mean(star, &se_star);
  if (rep.original_max_expected < 1.0 && rep.rewritten_max_expected < 1.0) {
    rep.ratio = rep.ratio_low = rep.ratio_high = 1.0;
    return rep;
  }
  rep.ratio = rep.rewritten_max_expected / rep.original_max_expected;
  const double lo_num = std::max(0.0, rep.rewritten_max_expected - 2 * se_star);
  const double hi_num = rep.rewritten_max_expected + 2 * se_star;
  const double lo_den = std::max(1e-12, rep.original_max_expected - 2 * se_orig);
  const double hi_den = rep.original_max_expected + 2 * se_orig;
  rep.ratio_low = lo_num / hi_den;
  rep.ratio_high = hi_num / lo_den;
  return rep;
}

}  // namespace jbound
