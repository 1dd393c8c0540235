#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "jbound/query.hpp"

namespace jbound {

// Values positionally aligned with a relation's attribute list.
using Tuple = std::vector<uint64_t>;

// A set of same-arity tuples. Canonical form: tuples sorted lexicographically
// and duplicate-free, which makes set comparison and membership cheap.
struct Relation {
  std::vector<std::string> attributes;
  std::vector<Tuple> tuples;

  static Relation make(std::vector<std::string> attributes, std::vector<Tuple> tuples);

  size_t arity() const { return attributes.size(); }
  size_t size() const { return tuples.size(); }
  // ||R|| = |R| * arity.
  uint64_t storage_size() const { return uint64_t{tuples.size()} * attributes.size(); }

  bool contains(const Tuple& t) const;
  int attribute_position(const std::string& name) const;
};

// True when both relations hold the same tuple set, aligning columns by
// attribute name (attribute sets must match).
bool relations_equal_as_sets(const Relation& a, const Relation& b);

// A concrete database for a query: one relation per schema entry, aligned by
// index with the query's relation order.
struct Instance {
  std::vector<Relation> relations;

  uint64_t total_tuples() const {  // |D|
    uint64_t s = 0;
    for (const auto& r : relations) s += r.size();
    return s;
  }
};

// Database file format (.jdb): sections starting `@<relationName>`, then one
// tuple per line, whitespace-separated decimal values in the relation's
// attribute order; '#' starts a comment. Duplicate rows are dropped
// silently; *duplicates_dropped reports how many when non-null.
Instance load_instance(const JoinQuery& q, const std::string& text,
                       const std::string& filename = "<db>",
                       uint64_t* duplicates_dropped = nullptr);

std::string write_instance(const JoinQuery& q, const Instance& d);

}  // namespace jbound
