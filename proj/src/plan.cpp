#include "jbound/plan.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "jbound/errors.hpp"
#include "jbound/lp.hpp"

namespace jbound {

PlanPtr Plan::make_leaf(std::string name) {
  auto p = std::make_shared<Plan>();
  p->kind = Kind::leaf;
  p->relation = std::move(name);
  return p;
}

PlanPtr Plan::make_join(PlanPtr l, PlanPtr r) {
  if (!l || !r) throw domain_error("join node needs two children");
  auto p = std::make_shared<Plan>();
  p->kind = Kind::join;
  p->left = std::move(l);
  p->right = std::move(r);
  return p;
}

PlanPtr Plan::make_project(std::vector<std::string> attrs, PlanPtr child) {
  if (!child) throw domain_error("project node needs a child");
  auto p = std::make_shared<Plan>();
  p->kind = Kind::project;
  p->project_attrs = std::move(attrs);
  p->left = std::move(child);
  return p;
}

PlanPtr Plan::make_unit() {
  auto p = std::make_shared<Plan>();
  p->kind = Kind::unit;
  return p;
}

bool plans_equal(const Plan& a, const Plan& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Plan::Kind::leaf:
      return a.relation == b.relation;
    case Plan::Kind::unit:
      return true;
    case Plan::Kind::join:
      return plans_equal(*a.left, *b.left) && plans_equal(*a.right, *b.right);
    case Plan::Kind::project:
      return a.project_attrs == b.project_attrs && plans_equal(*a.left, *b.left);
  }
  return false;
}

std::string print_plan(const Plan& p) {
  switch (p.kind) {
    case Plan::Kind::leaf:
      return p.relation;
    case Plan::Kind::unit:
      return "(unit)";
    case Plan::Kind::join:
      return "(join " + print_plan(*p.left) + " " + print_plan(*p.right) + ")";
    case Plan::Kind::project: {
      std::string s = "(project (";
      for (size_t i = 0; i < p.project_attrs.size(); ++i) {
        if (i) s += ' ';
        s += p.project_attrs[i];
      }
      s += ") " + print_plan(*p.left) + ")";
      return s;
    }
  }
  throw internal_error("unknown plan kind");
}

namespace {

struct Tokenizer {
  std::vector<std::string> tokens;
  size_t pos = 0;
  std::string filename;

  const std::string& peek() const {
    static const std::string kEnd = "";
    return pos < tokens.size() ? tokens[pos] : kEnd;
  }
  std::string next() {
    if (pos >= tokens.size()) throw parse_error(filename, 1, "unexpected end of plan");
    return tokens[pos++];
  }
};

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  };
  bool comment = false;
  for (char c : text) {
    if (comment) {
      if (c == '\n') comment = false;
      continue;
    }
    if (c == '#') {
      flush();
      comment = true;
    } else if (c == '(' || c == ')') {
      flush();
      out.push_back(std::string(1, c));
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      cur += c;
    }
  }
  flush();
  return out;
}

PlanPtr parse_term(Tokenizer& tk) {
  std::string t = tk.next();
  if (t == ")") throw parse_error(tk.filename, 1, "unexpected ')'");
  if (t != "(") return Plan::make_leaf(t);
  const std::string op = tk.next();
  if (op == "unit") {
    if (tk.next() != ")") throw parse_error(tk.filename, 1, "expected ')' after unit");
    return Plan::make_unit();
  }
  if (op == "join") {
    PlanPtr l = parse_term(tk);
    PlanPtr r = parse_term(tk);
    if (tk.next() != ")") throw parse_error(tk.filename, 1, "expected ')' after join operands");
    return Plan::make_join(std::move(l), std::move(r));
  }
  if (op == "project") {
    if (tk.next() != "(") throw parse_error(tk.filename, 1, "expected '(' before projection attributes");
    std::vector<std::string> attrs;
    while (tk.peek() != ")" && !tk.peek().empty()) attrs.push_back(tk.next());
    if (tk.next() != ")") throw parse_error(tk.filename, 1, "unterminated attribute list");
    PlanPtr child = parse_term(tk);
    if (tk.next() != ")") throw parse_error(tk.filename, 1, "expected ')' after project child");
    return Plan::make_project(std::move(attrs), std::move(child));
  }
  throw parse_error(tk.filename, 1, "unknown operator '" + op + "'");
}

}  // namespace

PlanPtr parse_plan(const std::string& text, const std::string& filename) {
  Tokenizer tk{tokenize(text), 0, filename};
  if (tk.tokens.empty()) throw parse_error(filename, 1, "empty plan");
  PlanPtr p = parse_term(tk);
  if (tk.pos != tk.tokens.size()) throw parse_error(filename, 1, "trailing tokens after plan");
  return p;
}

PlanStats plan_stats(const Plan& p) {
  PlanStats s;
  switch (p.kind) {
    case Plan::Kind::leaf:
      s.leaf_count = 1;
      s.depth = 1;
      break;
    case Plan::Kind::unit:
      s.depth = 1;
      break;
    case Plan::Kind::join: {
      const PlanStats l = plan_stats(*p.left);
      const PlanStats r = plan_stats(*p.right);
      s.leaf_count = l.leaf_count + r.leaf_count;
      s.projection_count = l.projection_count + r.projection_count;
      s.depth = 1 + std::max(l.depth, r.depth);
      break;
    }
    case Plan::Kind::project: {
      const PlanStats c = plan_stats(*p.left);
      s.leaf_count = c.leaf_count;
      s.projection_count = c.projection_count + 1;
      s.depth = 1 + c.depth;
      break;
    }
  }
  return s;
}

namespace {

std::vector<std::string> sorted_by_universe(const std::set<std::string>& attrs,
                                            const JoinQuery& q) {
  std::vector<std::string> out;
  for (const auto& a : q.attributes())
    if (attrs.count(a)) out.push_back(a);
  return out;
}

std::set<std::string> output_attr_set(const Plan& p, const JoinQuery& q) {
  switch (p.kind) {
    case Plan::Kind::leaf: {
      const int r = q.relation_index(p.relation);
      if (r < 0) throw domain_error("plan leaf names unknown relation '" + p.relation + "'");
      const auto& attrs = q.relations()[r].attributes;
      return {attrs.begin(), attrs.end()};
    }
    case Plan::Kind::unit:
      return {};
    case Plan::Kind::join: {
      auto l = output_attr_set(*p.left, q);
      const auto r = output_attr_set(*p.right, q);
      l.insert(r.begin(), r.end());
      return l;
    }
    case Plan::Kind::project: {
      const auto child = output_attr_set(*p.left, q);
      std::set<std::string> b(p.project_attrs.begin(), p.project_attrs.end());
      for (const auto& a : b)
        if (!child.count(a))
          throw domain_error("projection attribute '" + a + "' not produced by child plan");
      return b;
    }
  }
  throw internal_error("unknown plan kind");
}

}  // namespace

std::vector<std::string> output_attributes(const Plan& p, const JoinQuery& q) {
  return sorted_by_universe(output_attr_set(p, q), q);
}

std::vector<PlanPtr> gm_stage_plans(const JoinQuery& q, const std::vector<std::string>& order) {
  if (order.size() != q.attribute_count())
    throw domain_error("attribute order must be a permutation of the universe");
  std::set<std::string> seen;
  for (const auto& a : order) {
    if (q.attribute_index(a) < 0) throw domain_error("unknown attribute in order: " + a);
    if (!seen.insert(a).second) throw domain_error("repeated attribute in order: " + a);
  }

  std::vector<PlanPtr> stages;
  PlanPtr acc;
  std::set<std::string> prefix;
  for (size_t i = 0; i < order.size(); ++i) {
    prefix.insert(order[i]);
    const std::vector<std::string> b = sorted_by_universe(prefix, q);
    std::set<std::string> bset(b.begin(), b.end());
    for (size_t r = 0; r < q.relation_count(); ++r) {
      std::vector<std::string> target;
      for (const auto& a : q.relations()[r].attributes)
        if (bset.count(a)) target.push_back(a);
      PlanPtr proj =
          Plan::make_project(std::move(target), Plan::make_leaf(q.relations()[r].name));
      acc = acc ? Plan::make_join(std::move(acc), std::move(proj)) : std::move(proj);
    }
    stages.push_back(acc);
  }
  return stages;
}

PlanPtr gm_plan(const JoinQuery& q, const std::vector<std::string>& order) {
  return gm_stage_plans(q, order).back();
}

PlanPtr gm_plan(const JoinQuery& q) { return gm_plan(q, q.attributes()); }

PlanPtr cover_join_plan(const JoinQuery& q) {
  const EdgeCover cover = greedy_edge_cover(q);
  std::vector<char> in_cover(q.relation_count(), 0);
  for (int r : cover.relations) in_cover[r] = 1;
  std::vector<int> sequence = cover.relations;  // ascending = schema order
  for (size_t r = 0; r < q.relation_count(); ++r)
    if (!in_cover[r]) sequence.push_back(static_cast<int>(r));
  PlanPtr acc;
  for (int r : sequence) {
    PlanPtr leaf = Plan::make_leaf(q.relations()[r].name);
    acc = acc ? Plan::make_join(std::move(acc), std::move(leaf)) : std::move(leaf);
  }
  return acc;
}

namespace {

// mpz-free binomial; arguments stay tiny (2m <= ~12).
uint64_t binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::string subset_attr_name(const std::vector<int>& s, bool wide) {
  std::string name = "a";
  for (size_t i = 0; i < s.size(); ++i) {
    if (wide && i) name += '_';
    name += std::to_string(s[i]);
  }
  return name;
}

}  // namespace

AdversarialFamily adversarial_instance(int m, uint64_t n_values, uint64_t tuple_budget) {
  if (m < 1) throw domain_error("adversarial family needs m >= 1");
  if (n_values < 2) throw domain_error("adversarial family needs N >= 2");
  const int k = 2 * m;
  const uint64_t n = binom(k, m);
  const uint64_t arity = n / 2;
  const uint64_t per_relation = (n_values - 1) * arity + 1;
  const uint64_t total = per_relation * k;
  if (total > tuple_budget)
    throw capacity_error("adversarial instance exceeds tuple budget", total, tuple_budget);

  const bool wide = k > 9;
  // All m-subsets of [1, 2m] in lexicographic order; their names are the
  // attribute universe.
  std::vector<std::vector<int>> subsets;
  std::vector<int> comb(m);
  std::iota(comb.begin(), comb.end(), 1);
  while (true) {
    subsets.push_back(comb);
    int i = m - 1;
    while (i >= 0 && comb[i] == k - m + i + 1) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < m; ++j) comb[j] = comb[j - 1] + 1;
  }

  std::vector<RelationSchema> rels(k);
  for (int i = 1; i <= k; ++i) {
    RelationSchema& rel = rels[i - 1];
    rel.name = "R" + std::to_string(i);
    for (const auto& s : subsets)
      if (std::find(s.begin(), s.end(), i) != s.end())
        rel.attributes.push_back(subset_attr_name(s, wide));
  }
  JoinQuery q = JoinQuery::from_relations(std::move(rels));

  Instance d;
  d.relations.reserve(k);
  for (int i = 0; i < k; ++i) {
    const size_t r_arity = q.relations()[i].arity();
    std::vector<Tuple> tuples;
    tuples.reserve(per_relation);
    tuples.push_back(Tuple(r_arity, 1));
    for (size_t pos = 0; pos < r_arity; ++pos) {
      for (uint64_t v = 2; v <= n_values; ++v) {
        Tuple t(r_arity, 1);
        t[pos] = v;
        tuples.push_back(std::move(t));
      }
    }
    d.relations.push_back(Relation::make(q.relations()[i].attributes, std::move(tuples)));
  }
  return AdversarialFamily{std::move(q), std::move(d)};
}

namespace {

void tree_shapes(const std::vector<int>& seq, const JoinQuery& q, std::vector<PlanPtr>& out);

std::vector<PlanPtr> shapes_of(const std::vector<int>& seq, const JoinQuery& q) {
  std::vector<PlanPtr> out;
  tree_shapes(seq, q, out);
  return out;
}

void tree_shapes(const std::vector<int>& seq, const JoinQuery& q, std::vector<PlanPtr>& out) {
  if (seq.size() == 1) {
    out.push_back(Plan::make_leaf(q.relations()[seq[0]].name));
    return;
  }
  for (size_t split = 1; split < seq.size(); ++split) {
    const std::vector<int> left(seq.begin(), seq.begin() + split);
    const std::vector<int> right(seq.begin() + split, seq.end());
    for (const auto& l : shapes_of(left, q))
      for (const auto& r : shapes_of(right, q)) out.push_back(Plan::make_join(l, r));
  }
}

}  // namespace

std::vector<PlanPtr> enumerate_join_plans(const JoinQuery& q) {
  const size_t m = q.relation_count();
  if (m > 5)
    throw capability_error("join plan enumeration is limited to 5 relations "
                           "(Catalan(m-1) * m! plans)");
  std::vector<int> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<PlanPtr> out;
  do {
    tree_shapes(perm, q, out);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

namespace {

struct SplitInfo {
  const Plan* node;
  uint64_t colours;
  size_t height;
};

uint64_t collect_split_info(const Plan& p, const std::map<std::string, int>& colour_of_leaf,
                            std::vector<SplitInfo>& pre_order, size_t& height_out) {
  pre_order.push_back({&p, 0, 0});
  const size_t self = pre_order.size() - 1;
  uint64_t mask = 0;
  size_t height = 0;
  switch (p.kind) {
    case Plan::Kind::leaf: {
      auto it = colour_of_leaf.find(p.relation);
      if (it == colour_of_leaf.end())
        throw domain_error("leaf '" + p.relation + "' has no colour");
      mask = uint64_t{1} << it->second;
      break;
    }
    case Plan::Kind::unit:
      break;
    case Plan::Kind::join: {
      size_t hl = 0, hr = 0;
      mask = collect_split_info(*p.left, colour_of_leaf, pre_order, hl);
      mask |= collect_split_info(*p.right, colour_of_leaf, pre_order, hr);
      height = 1 + std::max(hl, hr);
      break;
    }
    case Plan::Kind::project: {
      size_t hc = 0;
      mask = collect_split_info(*p.left, colour_of_leaf, pre_order, hc);
      height = 1 + hc;
      break;
    }
  }
  pre_order[self].colours = mask;
  pre_order[self].height = height;
  height_out = height;
  return mask;
}

const Plan* child_in_range(const Plan& node, const std::vector<SplitInfo>& info,
                           size_t lo, size_t hi) {
  auto span = [&](const Plan* p) -> size_t {
    for (const auto& si : info)
      if (si.node == p) return static_cast<size_t>(__builtin_popcountll(si.colours));
    throw internal_error("split info missing for node");
  };
  const Plan* candidates[2] = {node.left.get(), node.right.get()};
  for (const Plan* c : candidates) {
    if (!c) continue;
    const size_t s = span(c);
    if (s >= lo && s <= hi) return c;
  }
  return nullptr;
}

}  // namespace

const Plan* balanced_split(const Plan& p, const std::map<std::string, int>& colour_of_leaf) {
  for (const auto& [name, c] : colour_of_leaf)
    if (c < 0 || c >= 64) throw domain_error("colour index out of range for leaf " + name);
  std::vector<SplitInfo> info;
  size_t root_height = 0;
  const uint64_t all = collect_split_info(p, colour_of_leaf, info, root_height);
  const size_t c = static_cast<size_t>(__builtin_popcountll(all));
  if (c < 2) throw domain_error("balanced_split needs at least 2 leaf colours");
  const size_t m = c / 2;
  const size_t lo = (m + 3) / 2;  // ceil((m+2)/2)
  const size_t hi = m + 1;

  // Minimum-height node spanning at least m+2 colours; ties go to the first
  // such node in DFS order.
  const SplitInfo* pick = nullptr;
  for (const auto& si : info) {
    const size_t span = static_cast<size_t>(__builtin_popcountll(si.colours));
    if (span >= m + 2 && (!pick || si.height < pick->height)) pick = &si;
  }
  if (!pick) {
    // Degenerate sizes (c <= m+1, i.e. m = 1): the root itself must fit.
    const size_t span = c;
    if (span >= lo && span <= hi) return &p;
    throw internal_error("no balanced split exists");
  }
  const Plan* child = child_in_range(*pick->node, info, lo, hi);
  if (!child) throw internal_error("minimum-height node has no child in the colour range");
  return child;
}

const Plan* balanced_split(const Plan& p) {
  std::map<std::string, int> colours;
  // Colour = leaf relation name, numbered in first-appearance order.
  std::vector<std::string> order;
  std::function<void(const Plan&)> walk = [&](const Plan& node) {
    if (node.kind == Plan::Kind::leaf) {
      if (!colours.count(node.relation)) {
        colours[node.relation] = static_cast<int>(order.size());
        order.push_back(node.relation);
      }
      return;
    }
    if (node.left) walk(*node.left);
    if (node.right) walk(*node.right);
  };
  walk(p);
  return balanced_split(p, colours);
}

}  // namespace jbound
