#include "jbound/relation.hpp"

#include <algorithm>
#include <sstream>

#include "jbound/errors.hpp"

namespace jbound {

Relation Relation::make(std::vector<std::string> attributes, std::vector<Tuple> tuples) {
  for (const auto& t : tuples)
    if (t.size() != attributes.size())
      throw domain_error("tuple arity does not match attribute list");
  std::sort(tuples.begin(), tuples.end());
  tuples.erase(std::unique(tuples.begin(), tuples.end()), tuples.end());
  Relation r;
  r.attributes = std::move(attributes);
  r.tuples = std::move(tuples);
  return r;
}

bool Relation::contains(const Tuple& t) const {
  return std::binary_search(tuples.begin(), tuples.end(), t);
}

int Relation::attribute_position(const std::string& name) const {
  for (size_t i = 0; i < attributes.size(); ++i)
    if (attributes[i] == name) return static_cast<int>(i);
  return -1;
}

bool relations_equal_as_sets(const Relation& a, const Relation& b) {
  if (a.size() != b.size()) return false;
  if (a.attributes.size() != b.attributes.size()) return false;
  // Map b's columns onto a's attribute order.
  std::vector<int> pos(a.attributes.size());
  for (size_t i = 0; i < a.attributes.size(); ++i) {
    const int p = b.attribute_position(a.attributes[i]);
    if (p < 0) return false;
    pos[i] = p;
  }
  std::vector<Tuple> mapped;
  mapped.reserve(b.tuples.size());
  for (const auto& t : b.tuples) {
    Tuple u(pos.size());
    for (size_t i = 0; i < pos.size(); ++i) u[i] = t[pos[i]];
    mapped.push_back(std::move(u));
  }
  std::sort(mapped.begin(), mapped.end());
  return mapped == a.tuples;
}

Instance load_instance(const JoinQuery& q, const std::string& text,
                       const std::string& filename, uint64_t* duplicates_dropped) {
  std::vector<std::vector<Tuple>> rows(q.relation_count());
  std::vector<char> seen(q.relation_count(), 0);
  int current = -1;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  uint64_t raw_rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;
    if (word[0] == '@') {
      const std::string name = word.substr(1);
      current = q.relation_index(name);
      if (current < 0) throw parse_error(filename, lineno, "unknown relation '" + name + "'");
      if (seen[current]) throw parse_error(filename, lineno, "duplicate section '@" + name + "'");
      seen[current] = 1;
      continue;
    }
    if (current < 0) throw parse_error(filename, lineno, "tuple before any '@relation' section");
    Tuple t;
    ls.clear();
    ls.str(line);
    uint64_t v;
    while (ls >> v) t.push_back(v);
    if (!ls.eof()) throw parse_error(filename, lineno, "malformed tuple value");
    if (t.size() != q.relations()[current].arity())
      throw parse_error(filename, lineno,
                        "tuple arity " + std::to_string(t.size()) + " does not match relation " +
                            q.relations()[current].name + " (arity " +
                            std::to_string(q.relations()[current].arity()) + ")");
    rows[current].push_back(std::move(t));
    ++raw_rows;
  }
  for (size_t r = 0; r < q.relation_count(); ++r)
    if (!seen[r]) throw parse_error(filename, lineno, "missing section '@" + q.relations()[r].name + "'");

  Instance d;
  d.relations.reserve(q.relation_count());
  uint64_t kept = 0;
  for (size_t r = 0; r < q.relation_count(); ++r) {
    d.relations.push_back(Relation::make(q.relations()[r].attributes, std::move(rows[r])));
    kept += d.relations.back().size();
  }
  if (duplicates_dropped) *duplicates_dropped = raw_rows - kept;
  return d;
}

std::string write_instance(const JoinQuery& q, const Instance& d) {
  if (d.relations.size() != q.relation_count())
    throw domain_error("instance does not match query schema");
  std::ostringstream out;
  for (size_t r = 0; r < q.relation_count(); ++r) {
    out << '@' << q.relations()[r].name << '\n';
    for (const auto& t : d.relations[r].tuples) {
      for (size_t i = 0; i < t.size(); ++i) {
        if (i) out << ' ';
        out << t[i];
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace jbound
