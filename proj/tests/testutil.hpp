#pragma once

#include <random>
#include <string>
#include <vector>

#include "jbound/query.hpp"
#include "jbound/rational.hpp"
#include "jbound/relation.hpp"

namespace jbtest {

using namespace jbound;

inline JoinQuery triangle() {
  return JoinQuery::parse("rel R a b\nrel S b c\nrel T c a\n");
}

struct Rng {
  std::mt19937_64 gen;

  explicit Rng(uint64_t seed) : gen(seed) {}

  // Uniform in [lo, hi].
  int uniform(int lo, int hi) {
    return static_cast<int>(gen() % static_cast<uint64_t>(hi - lo + 1)) + lo;
  }
  uint64_t value(uint64_t bound) { return gen() % bound; }
};

// Random query over at most max_n attributes and at most max_m relations;
// the universe is the set of attributes actually used.
inline JoinQuery random_query(Rng& rng, int max_m, int max_n, int max_arity) {
  const int pool = rng.uniform(1, max_n);
  const int m = rng.uniform(1, max_m);
  std::vector<RelationSchema> rels;
  for (int r = 0; r < m; ++r) {
    const int arity = rng.uniform(1, std::min(max_arity, pool));
    std::vector<int> attrs(pool);
    for (int i = 0; i < pool; ++i) attrs[i] = i;
    for (int i = 0; i < arity; ++i)
      std::swap(attrs[i], attrs[rng.uniform(i, pool - 1)]);
    attrs.resize(arity);
    RelationSchema rel;
    rel.name = "R" + std::to_string(r);
    for (int a : attrs) rel.attributes.push_back("a" + std::to_string(a));
    rels.push_back(std::move(rel));
  }
  return JoinQuery::from_relations(std::move(rels));
}

inline Instance random_instance(Rng& rng, const JoinQuery& q, int max_tuples, uint64_t domain) {
  Instance d;
  for (size_t r = 0; r < q.relation_count(); ++r) {
    const int count = rng.uniform(0, max_tuples);
    std::vector<Tuple> tuples;
    for (int i = 0; i < count; ++i) {
      Tuple t(q.relations()[r].arity());
      for (auto& v : t) v = rng.value(domain);
      tuples.push_back(std::move(t));
    }
    d.relations.push_back(Relation::make(q.relations()[r].attributes, std::move(tuples)));
  }
  return d;
}

// Instance whose relation sizes are exactly the requested values (tuples
// drawn without replacement from [domain]^arity; domain must be large
// enough).
inline Instance random_instance_exact_sizes(Rng& rng, const JoinQuery& q,
                                            const std::vector<uint64_t>& sizes,
                                            uint64_t domain) {
  Instance d;
  for (size_t r = 0; r < q.relation_count(); ++r) {
    const size_t arity = q.relations()[r].arity();
    uint64_t capacity = 1;
    for (size_t i = 0; i < arity; ++i) capacity *= domain;
    if (sizes[r] > capacity)
      throw domain_error("requested size exceeds the number of distinct tuples");
    std::vector<Tuple> tuples;
    while (tuples.size() < sizes[r]) {
      Tuple t(arity);
      for (auto& v : t) v = rng.value(domain);
      bool fresh = true;
      for (const auto& u : tuples)
        if (u == t) { fresh = false; break; }
      if (fresh) tuples.push_back(std::move(t));
    }
    d.relations.push_back(Relation::make(q.relations()[r].attributes, std::move(tuples)));
  }
  return d;
}

inline Rational harmonic(int n) {
  Rational h(0);
  for (int i = 1; i <= n; ++i) h += Rational(1, i);
  return h;
}

}  // namespace jbtest
