#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "jbound/engine.hpp"

#include <thread>

#include "jbound/bounds.hpp"
#include "jbound/plan.hpp"
#include "testutil.hpp"

using namespace jbound;

namespace {

Relation rel(std::vector<std::string> attrs, std::vector<Tuple> tuples) {
  return Relation::make(std::move(attrs), std::move(tuples));
}

// Nested-loop oracle for binary joins.
Relation nested_loop_join(const Relation& a, const Relation& b) {
  std::vector<std::string> shared;
  for (const auto& s : a.attributes)
    if (b.attribute_position(s) >= 0) shared.push_back(s);
  std::vector<std::string> out_attrs = a.attributes;
  for (const auto& s : b.attributes)
    if (a.attribute_position(s) < 0) out_attrs.push_back(s);
  std::vector<Tuple> out;
  for (const auto& ta : a.tuples) {
    for (const auto& tb : b.tuples) {
      bool ok = true;
      for (const auto& s : shared) {
        if (ta[a.attribute_position(s)] != tb[b.attribute_position(s)]) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      Tuple t = ta;
      for (size_t i = 0; i < b.attributes.size(); ++i)
        if (a.attribute_position(b.attributes[i]) < 0) t.push_back(tb[i]);
      out.push_back(std::move(t));
    }
  }
  return Relation::make(out_attrs, std::move(out));
}

}  // namespace

TEST_CASE("join basics") {
  const Relation r = rel({"a", "b"}, {{1, 2}});
  const Relation s = rel({"b", "c"}, {{2, 3}});
  const Relation j = join(r, s);
  CHECK(j.attributes == std::vector<std::string>{"a", "b", "c"});
  CHECK(j.tuples == std::vector<Tuple>{{1, 2, 3}});

  CHECK(join(r, rel({"b", "c"}, {})).size() == 0);

  const Relation r2 = rel({"a", "b"}, {{1, 1}, {2, 1}});
  const Relation s2 = rel({"b", "c"}, {{1, 5}});
  const Relation j2 = join(r2, s2);
  CHECK(relations_equal_as_sets(j2, nested_loop_join(r2, s2)));
  CHECK(j2.size() == 2);
  CHECK(j2.contains({1, 1, 5}));
  CHECK(j2.contains({2, 1, 5}));
}

TEST_CASE("join with disjoint attributes is a cartesian product") {
  const Relation r = rel({"a"}, {{1}, {2}});
  const Relation s = rel({"b"}, {{5}, {6}, {7}});
  const Relation j = join(r, s);
  CHECK(j.size() == 6);
  CHECK(relations_equal_as_sets(j, nested_loop_join(r, s)));
}

TEST_CASE("join respects the tuple budget") {
  const Relation r = rel({"a"}, {{1}, {2}, {3}});
  const Relation s = rel({"b"}, {{1}, {2}, {3}});
  CHECK_THROWS_AS(join(r, s, 8), capacity_error);
  CHECK_NOTHROW(join(r, s, 9));
}

TEST_CASE("projection") {
  const Relation r = rel({"a", "b"}, {{1, 2}, {1, 3}});
  const Relation p = project(r, {"a"});
  CHECK(p.attributes == std::vector<std::string>{"a"});
  CHECK(p.tuples == std::vector<Tuple>{{1}});

  CHECK(relations_equal_as_sets(project(r, {"a", "b"}), r));
  CHECK(project(rel({"a", "b"}, {}), {"b"}).size() == 0);
  CHECK_THROWS_AS(project(r, {"z"}), domain_error);

  // Projection to the empty attribute set: 0-ary, nonempty iff input is.
  CHECK(project(r, {}).size() == 1);
  CHECK(project(r, {}).arity() == 0);
  CHECK(project(rel({"a"}, {}), {}).size() == 0);
}

TEST_CASE("project composition") {
  jbtest::Rng rng(5);
  const Relation r = rel({"a", "b", "c"},
                         {{1, 2, 3}, {1, 2, 4}, {2, 2, 2}, {0, 1, 0}, {1, 1, 1}});
  CHECK(relations_equal_as_sets(project(project(r, {"a", "b"}), {"a"}), project(r, {"a"})));
  CHECK(relations_equal_as_sets(project(project(r, {"b", "c"}), {"c"}), project(r, {"c"})));
}

TEST_CASE("storage size accounting") {
  const Relation r = rel({"a", "b"}, {{1, 2}, {3, 4}, {5, 6}});
  CHECK(r.storage_size() == 6);
  const Relation j = join(r, rel({"b", "c"}, {{2, 9}, {4, 9}}));
  CHECK(j.storage_size() == j.size() * j.arity());
}

TEST_CASE("evaluate a leaf and a small tree") {
  const JoinQuery q = jbtest::triangle();
  const WorstCaseInstance wc = worst_case_instance(q, 2);

  const PlanPtr leaf = Plan::make_leaf("R");
  const auto [lr, lt] = evaluate(*leaf, q, wc.instance);
  CHECK(lr.size() == 4);
  CHECK(lt.entries.size() == 1);

  const PlanPtr tree = Plan::make_join(
      Plan::make_join(Plan::make_leaf("R"), Plan::make_leaf("S")), Plan::make_leaf("T"));
  const auto [rel_out, trace] = evaluate(*tree, q, wc.instance);
  CHECK(rel_out.size() == 8);
  const auto* rs = trace.find(tree->left.get());
  REQUIRE(rs != nullptr);
  CHECK(rs->cardinality == 8);
  CHECK(trace.peak_cardinality == 8);
  CHECK(trace.entries.size() == 5);  // one per subplan, post-order
  CHECK(relations_equal_as_sets(rel_out, oracle_answer(q, wc.instance)));
}

TEST_CASE("evaluate projection composition") {
  const JoinQuery q = JoinQuery::parse("rel R a b\nrel S b c\n");
  Instance d;
  d.relations.push_back(rel({"a", "b"}, {{1, 2}}));
  d.relations.push_back(rel({"b", "c"}, {{2, 3}}));
  const PlanPtr p = Plan::make_project(
      {"a"}, Plan::make_join(Plan::make_leaf("R"), Plan::make_leaf("S")));
  const auto [out, trace] = evaluate(*p, q, d);
  CHECK(out.tuples == std::vector<Tuple>{{1}});
}

TEST_CASE("evaluate error paths") {
  const JoinQuery q = jbtest::triangle();
  const WorstCaseInstance wc = worst_case_instance(q, 2);
  CHECK_THROWS_AS(evaluate(*Plan::make_leaf("Z"), q, wc.instance), precondition_error);
  Instance broken = wc.instance;
  broken.relations.pop_back();
  CHECK_THROWS_AS(evaluate(*Plan::make_leaf("R"), q, broken), precondition_error);
}

TEST_CASE("oracle basics") {
  const JoinQuery q = jbtest::triangle();
  Instance d;
  d.relations.push_back(rel({"a", "b"}, {{0, 0}}));
  d.relations.push_back(rel({"b", "c"}, {{0, 0}}));
  d.relations.push_back(rel({"c", "a"}, {{0, 0}}));
  const Relation ans = oracle_answer(q, d);
  CHECK(ans.size() == 1);
  CHECK(ans.tuples == std::vector<Tuple>{{0, 0, 0}});

  d.relations[1] = rel({"b", "c"}, {});
  CHECK(oracle_answer(q, d).size() == 0);
}

TEST_CASE("oracle budget") {
  const JoinQuery q = JoinQuery::parse("rel R a\nrel S b\n");
  Instance d;
  std::vector<Tuple> col;
  for (uint64_t v = 0; v < 100; ++v) col.push_back({v});
  d.relations.push_back(rel({"a"}, col));
  d.relations.push_back(rel({"b"}, col));
  CHECK_THROWS_AS(oracle_answer(q, d, 9999), capacity_error);
  CHECK(oracle_answer(q, d, 10000).size() == 10000);
}

TEST_CASE("engine agrees with the oracle on random plans") {
  jbtest::Rng rng(2024);
  int checked = 0;
  while (checked < 500) {
    const JoinQuery q = jbtest::random_query(rng, 3, 4, 3);
    const Instance d = jbtest::random_instance(rng, q, 6, 5);
    const Relation expect = oracle_answer(q, d);
    std::vector<PlanPtr> plans;
    plans.push_back(gm_plan(q));
    plans.push_back(cover_join_plan(q));
    auto all = enumerate_join_plans(q);
    for (size_t i = 0; i < all.size() && i < 2; ++i) plans.push_back(all[i]);
    for (const auto& p : plans) {
      const auto [out, trace] = evaluate(*p, q, d);
      CHECK(relations_equal_as_sets(out, expect));
      ++checked;
    }
  }
}

TEST_CASE("join is commutative and associative up to column order") {
  jbtest::Rng rng(77);
  for (int i = 0; i < 50; ++i) {
    const Relation a = rel({"a", "b"},
                           jbtest::random_instance(rng, JoinQuery::parse("rel R a b\n"), 8, 4)
                               .relations[0]
                               .tuples);
    const Relation b = rel({"b", "c"},
                           jbtest::random_instance(rng, JoinQuery::parse("rel S b c\n"), 8, 4)
                               .relations[0]
                               .tuples);
    const Relation c = rel({"c", "a"},
                           jbtest::random_instance(rng, JoinQuery::parse("rel T c a\n"), 8, 4)
                               .relations[0]
                               .tuples);
    CHECK(relations_equal_as_sets(join(a, b), join(b, a)));
    CHECK(relations_equal_as_sets(join(join(a, b), c), join(a, join(b, c))));
  }
}

TEST_CASE("join with itself is the identity") {
  jbtest::Rng rng(61);
  const JoinQuery q = JoinQuery::parse("rel R a b c\n");
  const Instance d = jbtest::random_instance(rng, q, 12, 5);
  CHECK(relations_equal_as_sets(join(d.relations[0], d.relations[0]), d.relations[0]));
}

TEST_CASE("concurrent evaluations share an instance safely") {
  const JoinQuery q = jbtest::triangle();
  const WorstCaseInstance wc = worst_case_instance(q, 2);
  const Relation expect = oracle_answer(q, wc.instance);
  const auto plans = enumerate_join_plans(q);
  std::vector<char> ok(plans.size(), 0);
  std::vector<std::thread> workers;
  for (size_t t = 0; t < 4; ++t) {
    workers.emplace_back([&, t] {
      for (size_t i = t; i < plans.size(); i += 4) {
        const auto [out, trace] = evaluate(*plans[i], q, wc.instance);
        ok[i] = relations_equal_as_sets(out, expect) ? 1 : 0;
      }
    });
  }
  for (auto& w : workers) w.join();
  for (char v : ok) CHECK(v == 1);
}

TEST_CASE("instance file round trip") {
  const JoinQuery q = jbtest::triangle();
  const WorstCaseInstance wc = worst_case_instance(q, 2);
  const std::string text = write_instance(q, wc.instance);
  uint64_t dropped = 123;
  const Instance back = load_instance(q, text, "db.jdb", &dropped);
  CHECK(dropped == 0);
  for (size_t r = 0; r < q.relation_count(); ++r)
    CHECK(relations_equal_as_sets(back.relations[r], wc.instance.relations[r]));
}

TEST_CASE("instance loader errors and duplicate handling") {
  const JoinQuery q = JoinQuery::parse("rel R a b\n");
  uint64_t dropped = 0;
  const Instance d = load_instance(q, "@R\n1 2\n1 2\n3 4\n", "db", &dropped);
  CHECK(dropped == 1);
  CHECK(d.relations[0].size() == 2);

  CHECK_THROWS_AS(load_instance(q, "@Z\n1 2\n", "db"), parse_error);
  CHECK_THROWS_AS(load_instance(q, "1 2\n", "db"), parse_error);
  CHECK_THROWS_AS(load_instance(q, "@R\n1\n", "db"), parse_error);     // arity mismatch
  CHECK_THROWS_AS(load_instance(q, "@R\n1 x\n", "db"), parse_error);   // bad value
  CHECK_THROWS_AS(load_instance(q, "# empty\n", "db"), parse_error);   // missing section
  try {
    load_instance(q, "@R\n1 2\n1 2 3\n", "db.jdb");
    FAIL("expected parse_error");
  } catch (const parse_error& e) {
    CHECK(e.line() == 3);
  }
}
