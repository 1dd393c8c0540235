#include "jbound/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <set>
#include <sstream>

#include "jbound/errors.hpp"
#include "jbound/plan.hpp"

namespace jbound {

ProbabilityModel ProbabilityModel::parse(const JoinQuery& q, const std::string& text,
                                         const std::string& filename) {
  ProbabilityModel m;
  m.weights.assign(q.relation_count(), Rational(1));
  std::vector<char> set(q.relation_count(), 0);
  bool have_n = false;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "weight") {
      std::string rel, value;
      if (!(ls >> rel >> value)) throw parse_error(filename, lineno, "weight needs a relation and a value");
      const int r = q.relation_index(rel);
      if (r < 0) throw parse_error(filename, lineno, "unknown relation '" + rel + "'");
      if (set[r]) throw parse_error(filename, lineno, "duplicate weight for '" + rel + "'");
      const auto w = Rational::parse(value);
      if (!w) throw parse_error(filename, lineno, "malformed rational '" + value + "'");
      if (w->sign() < 0) throw parse_error(filename, lineno, "weights must be non-negative");
      m.weights[r] = *w;
      set[r] = 1;
    } else if (word == "N") {
      if (have_n) throw parse_error(filename, lineno, "duplicate N line");
      uint64_t n;
      if (!(ls >> n) || n < 1) throw parse_error(filename, lineno, "N needs a positive integer");
      m.domain_size = n;
      have_n = true;
    } else {
      throw parse_error(filename, lineno, "expected 'weight' or 'N', got '" + word + "'");
    }
  }
  if (!have_n) throw parse_error(filename, lineno, "model file missing the N line");
  return m;
}

double ProbabilityModel::probability(size_t relation) const {
  return std::exp2(-weights[relation].to_double());
}

ExpectedSize expected_answer_size(const JoinQuery& q, const ProbabilityModel& model) {
  Rational weight_sum(0);
  for (const auto& w : model.weights) weight_sum += w;
  ExpectedSize out;
  const double n = static_cast<double>(q.attribute_count());
  out.value = std::exp2(n * std::log2(static_cast<double>(model.domain_size)) -
                        weight_sum.to_double());
  if (auto k = exact_log2_u64(model.domain_size)) {
    out.log2_exact =
        Rational(static_cast<long>(q.attribute_count())) * Rational(static_cast<long>(*k)) -
        weight_sum;
    out.value = std::exp2(out.log2_exact->to_double());
  }
  return out;
}

namespace {

uint64_t relation_mask(const JoinQuery& q, size_t r) {
  uint64_t mask = 0;
  for (int a : q.relation_attribute_indices(r)) mask |= uint64_t{1} << a;
  return mask;
}

std::vector<std::string> mask_attributes(const JoinQuery& q, uint64_t mask) {
  std::vector<std::string> out;
  for (size_t a = 0; a < q.attribute_count(); ++a)
    if (mask >> a & 1) out.push_back(q.attributes()[a]);
  return out;
}

void check_weights(const JoinQuery& q, const std::vector<Rational>& weights) {
  if (weights.size() != q.relation_count())
    throw domain_error("one weight per relation required");
  for (const auto& w : weights)
    if (w.sign() < 0) throw domain_error("weights must be non-negative");
}

}  // namespace

Rational subset_density(const JoinQuery& q, const std::vector<Rational>& weights,
                        const std::vector<std::string>& b) {
  check_weights(q, weights);
  if (b.empty()) throw domain_error("density of the empty attribute set is undefined");
  const JoinQuery sub = q.induced_subquery(b);
  Rational sum(0);
  for (const auto& rel : sub.relations()) sum += weights[q.relation_index(rel.name)];
  return sum / Rational(static_cast<long>(sub.attribute_count()));
}

DensityReport max_density_bruteforce(const JoinQuery& q, const std::vector<Rational>& weights) {
  check_weights(q, weights);
  const size_t n = q.attribute_count();
  if (n > 22)
    throw capability_error("brute-force density limited to 22 attributes; "
                           "use max_density_flow");
  std::vector<uint64_t> rel_masks(q.relation_count());
  for (size_t r = 0; r < q.relation_count(); ++r) rel_masks[r] = relation_mask(q, r);

  DensityReport best;
  best.max_density = Rational(-1);
  uint64_t best_mask = 0;
  const bool keep_all = n <= 10;
  if (keep_all) best.per_subset.emplace();

  for (uint64_t mask = 1; mask < (uint64_t{1} << n); ++mask) {
    Rational sum(0);
    for (size_t r = 0; r < q.relation_count(); ++r)
      if ((rel_masks[r] & ~mask) == 0) sum += weights[r];
    const Rational density = sum / Rational(__builtin_popcountll(mask));
    if (keep_all) best.per_subset->emplace_back(mask_attributes(q, mask), density);
    bool better = density > best.max_density;
    if (!better && density == best.max_density) {
      const int sz = __builtin_popcountll(mask);
      const int best_sz = __builtin_popcountll(best_mask);
      if (sz > best_sz) better = true;
      else if (sz == best_sz)
        better = mask_attributes(q, mask) < mask_attributes(q, best_mask);
    }
    if (better) {
      best.max_density = density;
      best_mask = mask;
    }
  }
  best.best_attributes = mask_attributes(q, best_mask);
  return best;
}

void FlowNetwork::add_arc(int from, int to, const Rational& capacity) {
  adj[from].push_back({to, capacity, static_cast<int>(adj[to].size())});
  adj[to].push_back({from, Rational(0), static_cast<int>(adj[from].size()) - 1});
}

Rational FlowNetwork::max_flow() {
  Rational total(0);
  while (true) {
    // BFS for a shortest augmenting path.
    std::vector<std::pair<int, int>> parent(adj.size(), {-1, -1});  // node, arc index
    std::deque<int> queue{source};
    parent[source] = {source, 0};
    while (!queue.empty() && parent[sink].first < 0) {
      const int u = queue.front();
      queue.pop_front();
      for (size_t i = 0; i < adj[u].size(); ++i) {
        const Arc& e = adj[u][i];
        if (e.residual.sign() > 0 && parent[e.to].first < 0) {
          parent[e.to] = {u, static_cast<int>(i)};
          queue.push_back(e.to);
        }
      }
    }
    if (parent[sink].first < 0) break;
    // Bottleneck along the path.
    Rational bottleneck;
    bool first = true;
    for (int v = sink; v != source;) {
      const auto [u, i] = parent[v];
      const Rational& cap = adj[u][i].residual;
      if (first || cap < bottleneck) bottleneck = cap;
      first = false;
      v = u;
    }
    for (int v = sink; v != source;) {
      const auto [u, i] = parent[v];
      adj[u][i].residual -= bottleneck;
      adj[adj[u][i].to][adj[u][i].reverse].residual += bottleneck;
      v = u;
    }
    total += bottleneck;
  }
  return total;
}

std::vector<char> FlowNetwork::source_side() const {
  std::vector<char> reach(adj.size(), 0);
  std::deque<int> queue{source};
  reach[source] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (const Arc& e : adj[u]) {
      if (e.residual.sign() > 0 && !reach[e.to]) {
        reach[e.to] = 1;
        queue.push_back(e.to);
      }
    }
  }
  return reach;
}

FlowNetwork build_density_network(const JoinQuery& q, const std::vector<Rational>& weights,
                                  const Rational& delta) {
  check_weights(q, weights);
  if (delta.sign() <= 0) throw domain_error("density network requires delta > 0");
  const size_t n = q.attribute_count();
  const size_t m = q.relation_count();
  FlowNetwork net;
  net.adj.resize(n + m + 2);
  net.source = 0;
  net.sink = static_cast<int>(n + m + 1);
  // "Infinite" capacity that provably never sits in a finite min cut.
  Rational weight_sum(0);
  for (const auto& w : weights) weight_sum += w;
  const Rational infinite = weight_sum + Rational(static_cast<long>(n)) * delta + Rational(1);
  for (size_t a = 0; a < n; ++a) net.add_arc(net.source, static_cast<int>(1 + a), delta);
  for (size_t r = 0; r < m; ++r) {
    for (int a : q.relation_attribute_indices(r))
      net.add_arc(1 + a, static_cast<int>(1 + n + r), infinite);
    net.add_arc(static_cast<int>(1 + n + r), net.sink, weights[r]);
  }
  return net;
}

Rational min_cut_capacity(const JoinQuery& q, const std::vector<Rational>& weights,
                          const Rational& delta) {
  FlowNetwork net = build_density_network(q, weights, delta);
  return net.max_flow();
}

DensityReport max_density_flow(const JoinQuery& q, const std::vector<Rational>& weights) {
  check_weights(q, weights);
  const size_t n = q.attribute_count();
  Rational weight_sum(0);
  for (const auto& w : weights) weight_sum += w;

  DensityReport out;
  if (weight_sum.is_zero()) {
    // Every density is zero; the whole universe is the canonical witness.
    out.max_density = Rational(0);
    out.best_attributes = q.attributes();
    return out;
  }

  const mpz_class d = common_denominator(weights);
  const mpz_class nd = d * static_cast<long>(n);
  // Distinct achievable densities have denominator <= n*d, so they are at
  // least 1/(n*d)^2 apart: an interval shorter than that pins down a unique
  // candidate.
  const Rational resolution = Rational(1) / Rational(nd * nd);
  const Rational half_min_positive = Rational(1) / (Rational(2) * Rational(nd));

  auto exceeds = [&](const Rational& delta) {
    return min_cut_capacity(q, weights, delta) < weight_sum;  // maxdensity > delta
  };

  if (!exceeds(half_min_positive)) {
    // Positive densities are >= 1/(n*d); none exceeds half that, so the
    // maximum density is zero. Witness: an attribute carrying no
    // positive-weight unary relation (one must exist).
    out.max_density = Rational(0);
    for (size_t a = 0; a < n; ++a) {
      const std::vector<std::string> b{q.attributes()[a]};
      if (subset_density(q, weights, b).is_zero()) {
        out.best_attributes = b;
        return out;
      }
    }
    throw internal_error("zero maximum density without a zero-density attribute");
  }

  Rational lo = half_min_positive;  // maxdensity > lo
  Rational hi = weight_sum;         // maxdensity <= hi
  while (hi - lo >= resolution) {
    const Rational mid = (lo + hi) / Rational(2);
    if (exceeds(mid)) lo = mid;
    else hi = mid;
  }
  out.max_density = simplest_in_interval(lo, hi);

  // Witness via the min cut just below the maximum: the cut attributes form
  // a subset whose density exceeds delta, and by the resolution argument
  // that density can only be the maximum itself.
  const Rational probe = out.max_density - resolution / Rational(2);
  FlowNetwork net = build_density_network(q, weights, probe);
  net.max_flow();
  const auto reach = net.source_side();
  std::vector<std::string> witness;
  for (size_t a = 0; a < n; ++a)
    if (!reach[1 + a]) witness.push_back(q.attributes()[a]);
  if (witness.empty()) throw internal_error("min cut produced an empty density witness");
  if (subset_density(q, weights, witness) != out.max_density)
    throw internal_error("density witness does not achieve the maximum density");
  out.best_attributes = std::move(witness);
  return out;
}

std::optional<double> variance_upper_bound(const JoinQuery& q, const ProbabilityModel& model) {
  const DensityReport density = max_density_flow(q, model.weights);
  const Rational log2n = [&] {
    if (auto k = exact_log2_u64(model.domain_size)) return Rational(static_cast<long>(*k));
    return Rational::from_double(std::log2(static_cast<double>(model.domain_size)));
  }();
  if (density.max_density > log2n) return std::nullopt;
  const ExpectedSize e = expected_answer_size(q, model);
  const double n = static_cast<double>(q.attribute_count());
  return e.value * e.value * (std::exp2(n) - 1.0) *
         std::exp2((density.max_density - log2n).to_double());
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

namespace {

// Deterministic uniform draw in [0, 1).
double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

Instance sample_instance(const JoinQuery& q, const ProbabilityModel& model, uint64_t seed,
                         uint64_t tuple_budget) {
  if (model.weights.size() != q.relation_count())
    throw domain_error("model does not match query schema");
  if (model.domain_size < 1) throw domain_error("model needs N >= 1");
  const uint64_t n_dom = model.domain_size;

  Instance d;
  d.relations.reserve(q.relation_count());
  for (size_t r = 0; r < q.relation_count(); ++r) {
    const size_t arity = q.relations()[r].arity();
    unsigned __int128 candidates = 1;
    for (size_t i = 0; i < arity; ++i) candidates *= n_dom;
    if (candidates > tuple_budget)
      throw capacity_error("sampling grid exceeds tuple budget",
                           static_cast<uint64_t>(std::min<unsigned __int128>(candidates,
                                                                             UINT64_MAX)),
                           tuple_budget);
    std::mt19937_64 gen(splitmix64(seed ^ static_cast<uint64_t>(r)));
    const double p = model.probability(r);
    std::vector<Tuple> tuples;
    Tuple t(arity, 0);
    while (true) {
      if (unit_uniform(gen) < p) tuples.push_back(t);
      size_t i = arity;
      bool done = true;
      while (i-- > 0) {
        if (++t[i] < n_dom) {
          done = false;
          break;
        }
        t[i] = 0;
      }
      if (done) break;
    }
    d.relations.push_back(Relation::make(q.relations()[r].attributes, std::move(tuples)));
  }
  return d;
}

ConcentrationReport concentration_experiment(const JoinQuery& q, const ProbabilityModel& model,
                                             uint64_t trials, uint64_t seed,
                                             uint64_t tuple_budget) {
  if (trials < 1) throw domain_error("concentration experiment needs at least one trial");
  const PlanPtr plan = gm_plan(q);
  std::vector<double> sizes;
  sizes.reserve(trials);
  uint64_t empty = 0;
  for (uint64_t t = 0; t < trials; ++t) {
    const uint64_t trial_seed = splitmix64(seed) + t;
    const Instance d = sample_instance(q, model, trial_seed, tuple_budget);
    const auto [answer, trace] = evaluate(*plan, q, d, tuple_budget);
    (void)trace;
    if (answer.size() == 0) ++empty;
    sizes.push_back(static_cast<double>(answer.size()));
  }
  ConcentrationReport rep;
  rep.trials = trials;
  double sum = 0;
  for (double s : sizes) sum += s;
  rep.empirical_mean = sum / static_cast<double>(trials);
  double ss = 0;
  for (double s : sizes) ss += (s - rep.empirical_mean) * (s - rep.empirical_mean);
  rep.empirical_variance = trials > 1 ? ss / static_cast<double>(trials - 1) : 0.0;
  rep.predicted_mean = expected_answer_size(q, model).value;
  rep.variance_bound = variance_upper_bound(q, model);
  rep.empty_fraction = static_cast<double>(empty) / static_cast<double>(trials);
  rep.max_density = max_density_flow(q, model.weights).max_density;
  rep.log2n_minus_density = std::log2(static_cast<double>(model.domain_size)) -
                            rep.max_density.to_double();
  return rep;
}

}  // namespace jbound
