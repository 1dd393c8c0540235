#include "jbound/lp.hpp"

#include <algorithm>
#include <numeric>

namespace jbound {

namespace {

// Tableau simplex on the dual form of the covering LP:
//
//   maximise sum_a y_a  subject to  sum_{a in A_R} y_a + s_R = c_R,  y, s >= 0.
//
// Starting basis = slacks (feasible because c >= 0). At optimality the
// tableau yields both the dual maximiser y and, from the reduced costs of
// the slack columns, the primal minimiser x of the covering LP, with exactly
// equal objectives.
class Simplex {
public:
  Simplex(const JoinQuery& q, const std::vector<Rational>& costs)
      : q_(q), m_(q.relation_count()), n_(q.attribute_count()) {
    rows_.assign(m_, std::vector<Rational>(n_ + m_, Rational(0)));
    rhs_.assign(m_, Rational(0));
    reduced_.assign(n_ + m_, Rational(0));
    basis_.resize(m_);
    for (size_t r = 0; r < m_; ++r) {
      for (int a : q.relation_attribute_indices(r)) rows_[r][a] = 1;
      rows_[r][n_ + r] = 1;
      rhs_[r] = costs[r];
      basis_[r] = n_ + r;
    }
    for (size_t a = 0; a < n_; ++a) reduced_[a] = Rational(-1);
  }

  CoverSolution solve() {
    while (true) {
      const int enter = entering();
      if (enter < 0) break;
      const int leave = leaving(enter);
      if (leave < 0) throw internal_error("cover LP unbounded");
      pivot(leave, enter);
    }
    return extract();
  }

private:
  // Bland: smallest column index with negative reduced cost.
  int entering() const {
    for (size_t j = 0; j < n_ + m_; ++j)
      if (reduced_[j].sign() < 0) return static_cast<int>(j);
    return -1;
  }

  // Minimum ratio; ties resolved by the smallest basic variable index
  // (Bland's leaving rule, no cycling).
  int leaving(int enter) const {
    int best = -1;
    Rational best_ratio;
    for (size_t i = 0; i < m_; ++i) {
      if (rows_[i][enter].sign() <= 0) continue;
      const Rational ratio = rhs_[i] / rows_[i][enter];
      if (best < 0 || ratio < best_ratio ||
          (ratio == best_ratio && basis_[i] < basis_[best])) {
        best = static_cast<int>(i);
        best_ratio = ratio;
      }
    }
    return best;
  }

  void pivot(int row, int col) {
    const Rational p = rows_[row][col];
    for (auto& v : rows_[row]) v /= p;
    rhs_[row] /= p;
    for (size_t i = 0; i < m_; ++i) {
      if (static_cast<int>(i) == row || rows_[i][col].is_zero()) continue;
      const Rational f = rows_[i][col];
      for (size_t j = 0; j < n_ + m_; ++j) rows_[i][j] -= f * rows_[row][j];
      rhs_[i] -= f * rhs_[row];
    }
    if (!reduced_[col].is_zero()) {
      const Rational f = reduced_[col];
      for (size_t j = 0; j < n_ + m_; ++j) reduced_[j] -= f * rows_[row][j];
    }
    basis_[row] = col;
  }

  CoverSolution extract() const {
    CoverSolution sol;
    sol.y.assign(n_, Rational(0));
    for (size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) sol.y[basis_[i]] = rhs_[i];
    sol.x.assign(m_, Rational(0));
    for (size_t r = 0; r < m_; ++r) sol.x[r] = reduced_[n_ + r];
    Rational dual_obj(0);
    for (const auto& v : sol.y) dual_obj += v;
    sol.objective = dual_obj;
    return sol;
  }

  const JoinQuery& q_;
  size_t m_, n_;
  std::vector<std::vector<Rational>> rows_;
  std::vector<Rational> rhs_;
  std::vector<Rational> reduced_;
  std::vector<size_t> basis_;
};

}  // namespace

CoverSolution solve_cover_lp(const CoverLp& lp) {
  const JoinQuery& q = *lp.query;
  if (lp.costs.size() != q.relation_count())
    throw domain_error("cover LP needs one cost per relation");
  for (const auto& c : lp.costs)
    if (c.sign() < 0) throw domain_error("cover LP costs must be non-negative");

  // Every attribute must be coverable, otherwise the LP is infeasible.
  std::vector<char> covered(q.attribute_count(), 0);
  for (size_t r = 0; r < q.relation_count(); ++r)
    for (int a : q.relation_attribute_indices(r)) covered[a] = 1;
  for (size_t a = 0; a < q.attribute_count(); ++a)
    if (!covered[a])
      throw precondition_error("attribute " + q.attributes()[a] + " appears in no relation");

  CoverSolution sol = Simplex(q, lp.costs).solve();

  // Strong duality must hold exactly; anything else is a solver bug.
  Rational primal_obj(0);
  for (size_t r = 0; r < q.relation_count(); ++r) primal_obj += lp.costs[r] * sol.x[r];
  if (primal_obj != sol.objective) throw internal_error("strong duality violated in simplex");

  const bool unit = std::all_of(lp.costs.begin(), lp.costs.end(),
                                [](const Rational& c) { return c == Rational(1); });
  if (unit) sol.rho_star = sol.objective;
  return sol;
}

CoverSolution solve_cover_lp(const JoinQuery& q) {
  CoverLp lp{&q, std::vector<Rational>(q.relation_count(), Rational(1))};
  return solve_cover_lp(lp);
}

bool is_fractional_cover(const JoinQuery& q, const std::vector<Rational>& x) {
  if (x.size() != q.relation_count()) return false;
  for (const auto& v : x)
    if (v.sign() < 0) return false;
  std::vector<Rational> coverage(q.attribute_count(), Rational(0));
  for (size_t r = 0; r < q.relation_count(); ++r)
    for (int a : q.relation_attribute_indices(r)) coverage[a] += x[r];
  for (const auto& c : coverage)
    if (c < Rational(1)) return false;
  return true;
}

bool is_dual_feasible(const JoinQuery& q, const std::vector<Rational>& y,
                      const std::vector<Rational>& costs) {
  if (y.size() != q.attribute_count() || costs.size() != q.relation_count()) return false;
  for (const auto& v : y)
    if (v.sign() < 0) return false;
  for (size_t r = 0; r < q.relation_count(); ++r) {
    Rational sum(0);
    for (int a : q.relation_attribute_indices(r)) sum += y[a];
    if (sum > costs[r]) return false;
  }
  return true;
}

bool check_complementary_slackness(const CoverLp& lp, const CoverSolution& sol) {
  const JoinQuery& q = *lp.query;
  if (!is_fractional_cover(q, sol.x) || !is_dual_feasible(q, sol.y, lp.costs))
    throw domain_error("complementary slackness requires a feasible primal/dual pair");
  for (size_t r = 0; r < q.relation_count(); ++r) {
    if (sol.x[r].sign() <= 0) continue;
    Rational sum(0);
    for (int a : q.relation_attribute_indices(r)) sum += sol.y[a];
    if (sum != lp.costs[r]) return false;
  }
  return true;
}

namespace {

std::vector<std::vector<uint64_t>> attribute_masks(const JoinQuery& q) {
  const size_t words = (q.attribute_count() + 63) / 64;
  std::vector<std::vector<uint64_t>> masks(q.relation_count(),
                                           std::vector<uint64_t>(words, 0));
  for (size_t r = 0; r < q.relation_count(); ++r)
    for (int a : q.relation_attribute_indices(r))
      masks[r][a / 64] |= uint64_t{1} << (a % 64);
  return masks;
}

}  // namespace

EdgeCover min_edge_cover(const JoinQuery& q) {
  const size_t m = q.relation_count();
  if (m > 20)
    throw capability_error("min_edge_cover is exhaustive and limited to 20 relations; "
                           "use greedy_edge_cover for larger queries");
  const auto masks = attribute_masks(q);
  const size_t words = (q.attribute_count() + 63) / 64;
  std::vector<uint64_t> full(words, 0);
  for (size_t a = 0; a < q.attribute_count(); ++a) full[a / 64] |= uint64_t{1} << (a % 64);

  // By increasing size, combinations in lexicographic order: the first cover
  // found is minimum with the required tie-break.
  for (size_t k = 1; k <= m; ++k) {
    std::vector<int> comb(k);
    std::iota(comb.begin(), comb.end(), 0);
    while (true) {
      std::vector<uint64_t> acc(words, 0);
      for (int r : comb)
        for (size_t w = 0; w < words; ++w) acc[w] |= masks[r][w];
      if (acc == full) return EdgeCover{comb};
      // next combination
      int i = static_cast<int>(k) - 1;
      while (i >= 0 && comb[i] == static_cast<int>(m - k + i)) --i;
      if (i < 0) break;
      ++comb[i];
      for (size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  throw internal_error("no edge cover exists; universe exceeds relation attributes");
}

EdgeCover greedy_edge_cover(const JoinQuery& q) {
  std::vector<char> covered(q.attribute_count(), 0);
  size_t uncovered = q.attribute_count();
  std::vector<int> picked;
  std::vector<char> used(q.relation_count(), 0);
  while (uncovered > 0) {
    int best = -1;
    size_t best_gain = 0;
    for (size_t r = 0; r < q.relation_count(); ++r) {
      if (used[r]) continue;
      size_t gain = 0;
      for (int a : q.relation_attribute_indices(r))
        if (!covered[a]) ++gain;
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<int>(r);
      }
    }
    if (best < 0) throw internal_error("greedy cover stuck; attribute covered by no relation");
    used[best] = 1;
    picked.push_back(best);
    for (int a : q.relation_attribute_indices(best)) {
      if (!covered[a]) {
        covered[a] = 1;
        --uncovered;
      }
    }
  }
  std::sort(picked.begin(), picked.end());
  return EdgeCover{picked};
}

}  // namespace jbound
