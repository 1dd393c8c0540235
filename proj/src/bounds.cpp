#include "jbound/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

#include "jbound/errors.hpp"

namespace jbound {

BoundValue agm_bound(const JoinQuery& q, const std::vector<Rational>& x,
                     const std::vector<uint64_t>& sizes) {
  if (sizes.size() != q.relation_count())
    throw domain_error("agm_bound needs one size per relation");
  if (!is_fractional_cover(q, x))
    throw domain_error("agm_bound requires a fractional edge cover");

  BoundValue out;
  out.factors.reserve(q.relation_count());
  bool zero = false;
  bool all_pow2 = true;
  Rational log2_sum(0);
  double log2_float = 0.0;
  for (size_t r = 0; r < q.relation_count(); ++r) {
    out.factors.push_back({q.relations()[r].name, sizes[r], x[r]});
    if (x[r].is_zero()) continue;  // size^0 = 1, even for size 0
    if (sizes[r] == 0) {
      zero = true;
      continue;
    }
    if (auto k = exact_log2_u64(sizes[r])) {
      log2_sum += x[r] * Rational(static_cast<long>(*k));
    } else {
      all_pow2 = false;
    }
    log2_float += x[r].to_double() * std::log2(static_cast<double>(sizes[r]));
  }
  if (zero) {
    out.value = 0.0;
    return out;
  }
  if (all_pow2) {
    out.log2_value = log2_sum;
    out.value = std::exp2(log2_sum.to_double());
  } else {
    out.value = std::exp2(log2_float);
  }
  return out;
}

namespace {

mpz_class pow_mpz(uint64_t base, unsigned long exp) {
  mpz_class b(static_cast<unsigned long>(base));
  mpz_class out;
  mpz_pow_ui(out.get_mpz_t(), b.get_mpz_t(), exp);
  return out;
}

uint64_t clamp_u64(const mpz_class& v) {
  return v.fits_ulong_p() ? static_cast<uint64_t>(v.get_ui()) : UINT64_MAX;
}

// Full grid over the given per-attribute widths (0-based initial segments).
std::vector<Tuple> grid_tuples(const std::vector<uint64_t>& widths) {
  std::vector<Tuple> out;
  uint64_t total = 1;
  for (uint64_t w : widths) total *= w;
  out.reserve(total);
  Tuple t(widths.size(), 0);
  while (true) {
    out.push_back(t);
    size_t i = widths.size();
    bool done = true;
    while (i-- > 0) {
      if (++t[i] < widths[i]) {
        done = false;
        break;
      }
      t[i] = 0;
    }
    if (done) break;
  }
  return out;
}

}  // namespace

WorstCaseInstance worst_case_instance(const JoinQuery& q, uint64_t n0, uint64_t tuple_budget) {
  if (n0 < 2) throw domain_error("worst_case_instance requires N0 >= 2");
  CoverSolution sol = solve_cover_lp(q);

  const mpz_class den = common_denominator(sol.y);
  if (!den.fits_ulong_p()) throw capability_error("dual denominator out of range");
  const unsigned long qden = den.get_ui();

  const size_t n = q.attribute_count();
  std::vector<mpz_class> widths(n);
  std::vector<unsigned long> p(n);
  for (size_t a = 0; a < n; ++a) {
    const mpz_class pa = sol.y[a].num() * (den / sol.y[a].den());
    if (!pa.fits_ulong_p()) throw capability_error("dual numerator out of range");
    p[a] = pa.get_ui();
    widths[a] = pow_mpz(n0, p[a]);
  }

  // Relation sizes are grid volumes; check the budget before materialising.
  mpz_class total = 0;
  std::vector<mpz_class> rel_size(q.relation_count());
  for (size_t r = 0; r < q.relation_count(); ++r) {
    mpz_class v = 1;
    for (int a : q.relation_attribute_indices(r)) v *= widths[a];
    rel_size[r] = v;
    total += v;
  }
  if (total > tuple_budget)
    throw capacity_error("worst-case instance exceeds tuple budget", clamp_u64(total),
                         tuple_budget);

  Instance d;
  d.relations.reserve(q.relation_count());
  for (size_t r = 0; r < q.relation_count(); ++r) {
    const auto& idx = q.relation_attribute_indices(r);
    std::vector<uint64_t> w(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) w[i] = clamp_u64(widths[idx[i]]);
    d.relations.push_back(
        Relation::make(q.relations()[r].attributes, grid_tuples(w)));
  }

  WorstCaseInstance out;
  out.instance = std::move(d);
  out.solution = std::move(sol);
  out.denominator = qden;
  out.grid_side = pow_mpz(n0, qden);
  out.widths = std::move(widths);
  return out;
}

Rational log2_cost(uint64_t n, bool* exact) {
  if (n == 0) throw domain_error("log2_cost of zero");
  if (auto k = exact_log2_u64(n)) {
    if (exact) *exact = true;
    return Rational(static_cast<long>(*k));
  }
  if (exact) *exact = false;
  return Rational::from_double(std::log2(static_cast<double>(n)));
}

std::pair<CoverSolution, BoundValue> constrained_bound(const JoinQuery& q,
                                                       const std::vector<uint64_t>& sizes) {
  if (sizes.size() != q.relation_count())
    throw domain_error("constrained bound needs one size per relation");
  for (uint64_t s : sizes)
    if (s < 1) throw domain_error("constrained bound requires sizes >= 1");
  std::vector<Rational> costs;
  costs.reserve(sizes.size());
  for (uint64_t s : sizes) costs.push_back(log2_cost(s));
  CoverSolution sol = solve_cover_lp(CoverLp{&q, std::move(costs)});
  BoundValue bound = agm_bound(q, sol.x, sizes);
  return {std::move(sol), std::move(bound)};
}

ConstrainedWorstInstance constrained_worst_instance(const JoinQuery& q,
                                                    const std::vector<uint64_t>& sizes,
                                                    uint64_t tuple_budget) {
  auto [sol, bound] = constrained_bound(q, sizes);
  (void)bound;

  uint64_t total = 0;
  for (uint64_t s : sizes) total += s;
  if (total > tuple_budget)
    throw capacity_error("constrained instance exceeds tuple budget", total, tuple_budget);

  const size_t n = q.attribute_count();
  std::vector<mpz_class> widths(n);
  for (size_t a = 0; a < n; ++a) widths[a] = floor_exp2(sol.y[a]);

  Instance d;
  d.relations.reserve(q.relation_count());
  for (size_t r = 0; r < q.relation_count(); ++r) {
    const auto& idx = q.relation_attribute_indices(r);
    const size_t arity = idx.size();
    std::vector<uint64_t> w(arity);
    mpz_class grid_size = 1;
    uint64_t max_width = 1;
    for (size_t i = 0; i < arity; ++i) {
      w[i] = clamp_u64(widths[idx[i]]);
      grid_size *= widths[idx[i]];
      max_width = std::max(max_width, w[i]);
    }
    if (grid_size > sizes[r])
      throw internal_error("dual grid exceeds the size constraint for relation " +
                           q.relations()[r].name);
    std::vector<Tuple> tuples = grid_tuples(w);

    // Pad to exactly N_R: the lexicographically smallest missing tuples over
    // values {0..V-1}, with V just large enough to supply N_R tuples.
    uint64_t v_limit = max_width;
    auto powv = [arity](uint64_t v) {
      unsigned __int128 p = 1;
      for (size_t i = 0; i < arity; ++i) p *= v;
      return p;
    };
    while (powv(v_limit) < sizes[r]) ++v_limit;
    if (tuples.size() < sizes[r]) {
      std::set<Tuple> have(tuples.begin(), tuples.end());
      Tuple t(arity, 0);
      while (tuples.size() < sizes[r]) {
        if (!have.count(t)) tuples.push_back(t);
        size_t i = arity;
        bool done = true;
        while (i-- > 0) {
          if (++t[i] < v_limit) {
            done = false;
            break;
          }
          t[i] = 0;
        }
        if (done) break;
      }
      if (tuples.size() != sizes[r])
        throw internal_error("padding failed to reach the requested size");
    }
    d.relations.push_back(Relation::make(q.relations()[r].attributes, std::move(tuples)));
    if (d.relations.back().size() != sizes[r])
      throw internal_error("constrained instance size mismatch for relation " +
                           q.relations()[r].name);
  }

  ConstrainedWorstInstance out;
  out.instance = std::move(d);
  out.solution = std::move(sol);
  out.widths = std::move(widths);
  return out;
}

GraphInput GraphInput::parse(const std::string& text, const std::string& filename) {
  GraphInput g;
  std::set<std::pair<int, int>> seen;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  auto intern = [&](const std::string& name) {
    const int i = g.vertex_index(name);
    if (i >= 0) return i;
    g.vertices.push_back(name);
    return static_cast<int>(g.vertices.size() - 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word, u, v;
    if (!(ls >> word)) continue;
    if (word != "edge") throw parse_error(filename, lineno, "expected 'edge', got '" + word + "'");
    if (!(ls >> u >> v)) throw parse_error(filename, lineno, "edge needs two vertices");
    std::string extra;
    if (ls >> extra) throw parse_error(filename, lineno, "trailing token '" + extra + "'");
    if (u == v) throw parse_error(filename, lineno, "self-loop at '" + u + "'");
    const int ui = intern(u);
    const int vi = intern(v);
    const auto key = std::minmax(ui, vi);
    if (!seen.insert({key.first, key.second}).second)
      throw parse_error(filename, lineno, "duplicate edge " + u + " " + v);
    g.edges.emplace_back(ui, vi);
  }
  return g;
}

int GraphInput::vertex_index(const std::string& name) const {
  for (size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i] == name) return static_cast<int>(i);
  return -1;
}

bool GraphInput::is_independent(const std::vector<int>& vertex_set) const {
  std::unordered_set<int> s(vertex_set.begin(), vertex_set.end());
  for (const auto& [u, v] : edges)
    if (s.count(u) && s.count(v)) return false;
  return true;
}

int GraphInput::independence_number() const {
  return static_cast<int>(maximum_independent_set().size());
}

std::vector<int> GraphInput::maximum_independent_set() const {
  const size_t n = vertices.size();
  if (n > 30) throw capability_error("independence number limited to 30 vertices");
  uint32_t best_mask = 0;
  int best = 0;
  for (uint32_t mask = 0; mask < (uint32_t{1} << n); ++mask) {
    const int size = __builtin_popcount(mask);
    if (size <= best) continue;
    bool ok = true;
    for (const auto& [u, v] : edges) {
      if ((mask >> u & 1) && (mask >> v & 1)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      best = size;
      best_mask = mask;
    }
  }
  std::vector<int> out;
  for (size_t i = 0; i < n; ++i)
    if (best_mask >> i & 1) out.push_back(static_cast<int>(i));
  return out;
}

std::pair<JoinQuery, std::vector<uint64_t>> graph_to_query(const GraphInput& g) {
  if (g.edges.empty()) throw domain_error("graph_to_query requires at least one edge");
  std::vector<RelationSchema> rels;
  rels.reserve(g.edges.size());
  for (const auto& [u, v] : g.edges) {
    RelationSchema rel;
    rel.name = "R_" + g.vertices[u] + "_" + g.vertices[v];
    rel.attributes = {g.vertices[u], g.vertices[v]};
    rels.push_back(std::move(rel));
  }
  std::vector<uint64_t> sizes(g.edges.size(), 2);
  return {JoinQuery::from_relations(std::move(rels)), std::move(sizes)};
}

Instance independent_set_instance(const GraphInput& g, const std::vector<std::string>& witness) {
  std::vector<int> idx;
  idx.reserve(witness.size());
  for (const auto& name : witness) {
    const int i = g.vertex_index(name);
    if (i < 0) throw domain_error("witness vertex not in graph: " + name);
    idx.push_back(i);
  }
  std::unordered_set<int> iset(idx.begin(), idx.end());
  if (iset.size() != idx.size()) throw domain_error("witness lists a vertex twice");
  if (!g.is_independent(idx)) throw domain_error("witness set is not independent");

  auto [q, sizes] = graph_to_query(g);
  (void)sizes;
  Instance d;
  d.relations.reserve(g.edges.size());
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const auto& [u, v] = g.edges[e];
    std::vector<Tuple> tuples;
    tuples.push_back({0, 0});
    if (iset.count(u)) tuples.push_back({1, 0});
    if (iset.count(v)) tuples.push_back({0, 1});
    if (tuples.size() == 1) tuples.push_back({2, 2});  // pad to exactly 2
    if (tuples.size() != 2) throw internal_error("witness relation size not 2");
    d.relations.push_back(Relation::make(q.relations()[e].attributes, std::move(tuples)));
  }
  return d;
}

}  // namespace jbound
