#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jbound/errors.hpp"

namespace jbound {

// A relation name together with its ordered, duplicate-free attribute list.
struct RelationSchema {
  std::string name;
  std::vector<std::string> attributes;

  size_t arity() const { return attributes.size(); }
};

// Vertex/edge view of a query. Edges form a multiset: two relations with the
// same attribute set contribute two edges.
struct Hypergraph {
  std::vector<std::string> vertices;
  std::vector<std::vector<std::string>> edges;
};

// A natural-join query: an ordered sequence of relation schemas plus the
// attribute universe. Relation order is file order and fixes determinism
// downstream (LP pivoting, plan generation). Immutable after construction.
class JoinQuery {
public:
  // Universe = union of the relation attribute sets, in first-appearance
  // order.
  static JoinQuery from_relations(std::vector<RelationSchema> relations);

  // Universe given explicitly; used by induced subqueries, whose universe
  // may contain attributes covered by no retained relation.
  static JoinQuery with_universe(std::vector<RelationSchema> relations,
                                 std::vector<std::string> universe);

  // Query file format (.jq): UTF-8 lines, '#' starts a comment, each
  // relation is `rel <name> <attr> <attr> ...`.
  static JoinQuery parse(const std::string& text, const std::string& filename = "<query>");

  const std::vector<RelationSchema>& relations() const { return relations_; }
  const std::vector<std::string>& attributes() const { return universe_; }

  size_t relation_count() const { return relations_.size(); }   // m
  size_t attribute_count() const { return universe_.size(); }   // n
  size_t query_size() const;                                    // |Q| = sum of arities

  // -1 when absent.
  int attribute_index(const std::string& name) const;
  int relation_index(const std::string& name) const;

  // Attribute indices (into the universe) of relation r.
  const std::vector<int>& relation_attribute_indices(size_t r) const {
    return relation_attr_indices_[r];
  }

  // Subquery induced by B: exactly the relations whose attributes all lie in
  // B; the universe of the result is B itself, so attributes of B covered by
  // no retained relation stay in the universe as isolated attributes.
  JoinQuery induced_subquery(const std::vector<std::string>& b) const;

  Hypergraph hypergraph() const;

  // Empty query; only useful as an assignment target.
  JoinQuery() = default;

private:
  void index();

  std::vector<RelationSchema> relations_;
  std::vector<std::string> universe_;
  std::vector<std::vector<int>> relation_attr_indices_;
};

}  // namespace jbound
