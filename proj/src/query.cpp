#include "jbound/query.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace jbound {

namespace {

bool valid_token(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

size_t JoinQuery::query_size() const {
  size_t s = 0;
  for (const auto& r : relations_) s += r.arity();
  return s;
}

void JoinQuery::index() {
  relation_attr_indices_.clear();
  relation_attr_indices_.reserve(relations_.size());
  std::unordered_map<std::string, int> attr_pos;
  for (size_t i = 0; i < universe_.size(); ++i) attr_pos[universe_[i]] = static_cast<int>(i);
  for (const auto& rel : relations_) {
    std::vector<int> idx;
    idx.reserve(rel.attributes.size());
    for (const auto& a : rel.attributes) {
      auto it = attr_pos.find(a);
      if (it == attr_pos.end())
        throw internal_error("relation attribute missing from universe: " + a);
      idx.push_back(it->second);
    }
    relation_attr_indices_.push_back(std::move(idx));
  }
}

JoinQuery JoinQuery::from_relations(std::vector<RelationSchema> relations) {
  std::vector<std::string> universe;
  std::unordered_set<std::string> seen;
  for (const auto& rel : relations) {
    for (const auto& a : rel.attributes) {
      if (seen.insert(a).second) universe.push_back(a);
    }
  }
  return with_universe(std::move(relations), std::move(universe));
}

JoinQuery JoinQuery::with_universe(std::vector<RelationSchema> relations,
                                   std::vector<std::string> universe) {
  std::unordered_set<std::string> names;
  std::unordered_set<std::string> in_universe(universe.begin(), universe.end());
  if (in_universe.size() != universe.size())
    throw domain_error("duplicate attribute in universe");
  for (const auto& rel : relations) {
    if (!names.insert(rel.name).second)
      throw domain_error("duplicate relation name: " + rel.name);
    if (rel.attributes.empty())
      throw domain_error("relation with empty attribute list: " + rel.name);
    std::unordered_set<std::string> attrs;
    for (const auto& a : rel.attributes) {
      if (!attrs.insert(a).second)
        throw domain_error("duplicate attribute " + a + " in relation " + rel.name);
      if (!in_universe.count(a))
        throw domain_error("relation attribute outside universe: " + a);
    }
  }
  JoinQuery q;
  q.relations_ = std::move(relations);
  q.universe_ = std::move(universe);
  q.index();
  return q;
}

JoinQuery JoinQuery::parse(const std::string& text, const std::string& filename) {
  std::vector<RelationSchema> rels;
  std::unordered_set<std::string> names;
  std::istringstream in(text);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;  // blank line
    if (word != "rel") throw parse_error(filename, lineno, "expected 'rel', got '" + word + "'");
    RelationSchema rel;
    if (!(ls >> rel.name)) throw parse_error(filename, lineno, "missing relation name");
    if (!valid_token(rel.name)) throw parse_error(filename, lineno, "invalid relation name '" + rel.name + "'");
    if (!names.insert(rel.name).second)
      throw parse_error(filename, lineno, "duplicate relation name '" + rel.name + "'");
    std::unordered_set<std::string> attrs;
    while (ls >> word) {
      if (!valid_token(word)) throw parse_error(filename, lineno, "invalid attribute '" + word + "'");
      if (!attrs.insert(word).second)
        throw parse_error(filename, lineno, "duplicate attribute '" + word + "' in relation " + rel.name);
      rel.attributes.push_back(word);
    }
    if (rel.attributes.empty()) throw parse_error(filename, lineno, "relation " + rel.name + " has no attributes");
    rels.push_back(std::move(rel));
  }
  if (rels.empty()) throw parse_error(filename, lineno, "query file declares no relations");
  return from_relations(std::move(rels));
}

int JoinQuery::attribute_index(const std::string& name) const {
  for (size_t i = 0; i < universe_.size(); ++i)
    if (universe_[i] == name) return static_cast<int>(i);
  return -1;
}

int JoinQuery::relation_index(const std::string& name) const {
  for (size_t i = 0; i < relations_.size(); ++i)
    if (relations_[i].name == name) return static_cast<int>(i);
  return -1;
}

JoinQuery JoinQuery::induced_subquery(const std::vector<std::string>& b) const {
  std::set<std::string> bset(b.begin(), b.end());
  for (const auto& a : bset)
    if (attribute_index(a) < 0) throw domain_error("attribute outside universe: " + a);
  std::vector<RelationSchema> kept;
  for (const auto& rel : relations_) {
    const bool inside = std::all_of(rel.attributes.begin(), rel.attributes.end(),
                                    [&](const std::string& a) { return bset.count(a) > 0; });
    if (inside) kept.push_back(rel);
  }
  // Universe keeps the original attribute order restricted to B.
  std::vector<std::string> universe;
  for (const auto& a : universe_)
    if (bset.count(a)) universe.push_back(a);
  return with_universe(std::move(kept), std::move(universe));
}

Hypergraph JoinQuery::hypergraph() const {
  Hypergraph h;
  h.vertices = universe_;
  h.edges.reserve(relations_.size());
  for (const auto& rel : relations_) h.edges.push_back(rel.attributes);
  return h;
}

}  // namespace jbound
