#include "jbound/engine.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "jbound/errors.hpp"

namespace jbound {

namespace {

struct TupleHash {
  size_t operator()(const Tuple& t) const {
    uint64_t h = 0x9e3779b97f4a7c15ull ^ t.size();
    for (uint64_t v : t) {
      h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      h *= 0xff51afd7ed558ccdull;
    }
    return static_cast<size_t>(h);
  }
};

std::vector<int> positions_of(const Relation& r, const std::vector<std::string>& names) {
  std::vector<int> pos;
  pos.reserve(names.size());
  for (const auto& n : names) {
    const int p = r.attribute_position(n);
    if (p < 0) throw internal_error("attribute lookup failed: " + n);
    pos.push_back(p);
  }
  return pos;
}

Tuple project_tuple(const Tuple& t, const std::vector<int>& pos) {
  Tuple out(pos.size());
  for (size_t i = 0; i < pos.size(); ++i) out[i] = t[pos[i]];
  return out;
}

}  // namespace

Relation join(const Relation& left, const Relation& right, uint64_t tuple_budget) {
  // Shared attributes in left order; output schema is left's attributes then
  // right's new ones.
  std::vector<std::string> shared;
  for (const auto& a : left.attributes)
    if (right.attribute_position(a) >= 0) shared.push_back(a);
  std::vector<std::string> out_attrs = left.attributes;
  std::vector<int> right_new_pos;
  for (size_t i = 0; i < right.attributes.size(); ++i) {
    if (left.attribute_position(right.attributes[i]) < 0) {
      out_attrs.push_back(right.attributes[i]);
      right_new_pos.push_back(static_cast<int>(i));
    }
  }

  const bool build_left = left.size() <= right.size();
  const Relation& build = build_left ? left : right;
  const Relation& probe = build_left ? right : left;
  const auto build_key = positions_of(build, shared);
  const auto probe_key = positions_of(probe, shared);

  std::unordered_map<Tuple, std::vector<const Tuple*>, TupleHash> table;
  table.reserve(build.size());
  for (const auto& t : build.tuples) table[project_tuple(t, build_key)].push_back(&t);

  // Exact output size first, so over-budget joins fail before materialising.
  uint64_t out_count = 0;
  for (const auto& t : probe.tuples) {
    auto it = table.find(project_tuple(t, probe_key));
    if (it != table.end()) out_count += it->second.size();
  }
  if (out_count > tuple_budget)
    throw capacity_error("join output exceeds tuple budget", out_count, tuple_budget);

  const auto left_pos = positions_of(left, left.attributes);
  std::vector<Tuple> out;
  out.reserve(out_count);
  for (const auto& t : probe.tuples) {
    auto it = table.find(project_tuple(t, probe_key));
    if (it == table.end()) continue;
    for (const Tuple* b : it->second) {
      const Tuple& lt = build_left ? *b : t;
      const Tuple& rt = build_left ? t : *b;
      Tuple combined;
      combined.reserve(out_attrs.size());
      for (int p : left_pos) combined.push_back(lt[p]);
      for (int p : right_new_pos) combined.push_back(rt[p]);
      out.push_back(std::move(combined));
    }
  }
  return Relation::make(std::move(out_attrs), std::move(out));
}

Relation project(const Relation& r, const std::vector<std::string>& target) {
  const std::set<std::string> want(target.begin(), target.end());
  for (const auto& a : want)
    if (r.attribute_position(a) < 0)
      throw domain_error("projection attribute '" + a + "' not in relation");
  std::vector<std::string> out_attrs;
  std::vector<int> pos;
  for (size_t i = 0; i < r.attributes.size(); ++i) {
    if (want.count(r.attributes[i])) {
      out_attrs.push_back(r.attributes[i]);
      pos.push_back(static_cast<int>(i));
    }
  }
  std::vector<Tuple> out;
  out.reserve(r.size());
  for (const auto& t : r.tuples) out.push_back(project_tuple(t, pos));
  return Relation::make(std::move(out_attrs), std::move(out));
}

const TraceEntry* EvalTrace::find(const Plan* node) const {
  for (const auto& e : entries)
    if (e.node == node) return &e;
  return nullptr;
}

namespace {

Relation evaluate_rec(const Plan& p, const JoinQuery& q, const Instance& d,
                      uint64_t budget, EvalTrace& trace) {
  Relation result;
  switch (p.kind) {
    case Plan::Kind::leaf: {
      const int r = q.relation_index(p.relation);
      if (r < 0) throw precondition_error("plan references missing relation '" + p.relation + "'");
      if (static_cast<size_t>(r) >= d.relations.size())
        throw precondition_error("instance has no relation for '" + p.relation + "'");
      const Relation& rel = d.relations[r];
      if (rel.attributes != q.relations()[r].attributes)
        throw precondition_error("instance attributes mismatch for relation '" + p.relation + "'");
      result = rel;
      break;
    }
    case Plan::Kind::unit:
      result = Relation::make({}, {Tuple{}});
      break;
    case Plan::Kind::join: {
      Relation l = evaluate_rec(*p.left, q, d, budget, trace);
      Relation r = evaluate_rec(*p.right, q, d, budget, trace);
      result = join(l, r, budget);
      break;
    }
    case Plan::Kind::project: {
      Relation c = evaluate_rec(*p.left, q, d, budget, trace);
      result = project(c, p.project_attrs);
      break;
    }
  }
  trace.entries.push_back(TraceEntry{&p, print_plan(p), result.size(),
                                     static_cast<uint32_t>(result.arity())});
  trace.peak_cardinality = std::max(trace.peak_cardinality, uint64_t{result.size()});
  return result;
}

}  // namespace

std::pair<Relation, EvalTrace> evaluate(const Plan& plan, const JoinQuery& q,
                                        const Instance& d, uint64_t tuple_budget) {
  if (d.relations.size() != q.relation_count())
    throw precondition_error("instance does not match query schema");
  EvalTrace trace;
  Relation out = evaluate_rec(plan, q, d, tuple_budget, trace);
  return {std::move(out), std::move(trace)};
}

Relation oracle_answer(const JoinQuery& q, const Instance& d, uint64_t candidate_budget) {
  if (d.relations.size() != q.relation_count())
    throw precondition_error("instance does not match query schema");
  const size_t n = q.attribute_count();

  // Per-attribute active domains (sorted, unique).
  std::vector<std::vector<uint64_t>> domains(n);
  for (size_t r = 0; r < q.relation_count(); ++r) {
    const auto& idx = q.relation_attribute_indices(r);
    for (const auto& t : d.relations[r].tuples)
      for (size_t i = 0; i < idx.size(); ++i) domains[idx[i]].push_back(t[i]);
  }
  unsigned __int128 candidates = 1;
  for (auto& dom : domains) {
    std::sort(dom.begin(), dom.end());
    dom.erase(std::unique(dom.begin(), dom.end()), dom.end());
    candidates *= dom.empty() ? 0 : dom.size();
    if (candidates > candidate_budget)
      throw capacity_error("oracle enumeration exceeds candidate budget",
                           static_cast<uint64_t>(std::min<unsigned __int128>(
                               candidates, UINT64_MAX)),
                           candidate_budget);
  }

  std::vector<Tuple> answers;
  if (candidates > 0) {
    std::vector<size_t> odo(n, 0);
    Tuple t(n);
    while (true) {
      for (size_t a = 0; a < n; ++a) t[a] = domains[a][odo[a]];
      bool ok = true;
      for (size_t r = 0; ok && r < q.relation_count(); ++r) {
        const auto& idx = q.relation_attribute_indices(r);
        Tuple proj(idx.size());
        for (size_t i = 0; i < idx.size(); ++i) proj[i] = t[idx[i]];
        ok = d.relations[r].contains(proj);
      }
      if (ok) answers.push_back(t);
      // advance odometer
      size_t a = n;
      bool done = true;
      while (a-- > 0) {
        if (++odo[a] < domains[a].size()) {
          done = false;
          break;
        }
        odo[a] = 0;
      }
      if (done) break;
    }
  }
  return Relation::make(q.attributes(), std::move(answers));
}

}  // namespace jbound
