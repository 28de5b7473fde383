#include "drmdp/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drmdp/lp.hpp"

namespace drmdp {

Polytope Polytope::from_vertices(Matrix vertices) {
  Polytope p;
  if (vertices.empty()) throw ValidationError("polytope: empty vertex list");
  p.dim = static_cast<int>(vertices[0].size());
  p.vertex_list = std::move(vertices);
  p.vertex_form = true;
  return p;
}

Polytope Polytope::from_halfspaces(int dim, Halfspaces hs) {
  Polytope p;
  p.dim = dim;
  p.halfspaces = std::move(hs);
  p.vertex_form = false;
  return p;
}

bool Polytope::feasible() const {
  if (vertex_form) return !vertex_list.empty();
  LinearProgram lp;
  lp.objective.assign(dim, 0.0);
  lp.lower.assign(dim, -kInf);
  lp.upper.assign(dim, kInf);
  lp.ineq_lhs = halfspaces.ineq_lhs;
  lp.ineq_rhs = halfspaces.ineq_rhs;
  lp.eq_lhs = halfspaces.eq_lhs;
  lp.eq_rhs = halfspaces.eq_rhs;
  return solve_lp(lp).ok();
}

std::pair<double, Vec> Polytope::support(const Vec& w) const {
  if (static_cast<int>(w.size()) != dim) throw ValidationError("polytope support: dimension mismatch");
  if (vertex_form) {
    double best = -kInf;
    int best_i = 0;
    for (int i = 0; i < static_cast<int>(vertex_list.size()); ++i) {
      double dot = 0.0;
      for (int d = 0; d < dim; ++d) dot += w[d] * vertex_list[i][d];
      if (dot > best + 1e-15) {
        best = dot;
        best_i = i;
      }
    }
    return {best, vertex_list[best_i]};
  }
  LinearProgram lp;
  lp.objective.resize(dim);
  for (int d = 0; d < dim; ++d) lp.objective[d] = -w[d];
  lp.lower.assign(dim, -kInf);
  lp.upper.assign(dim, kInf);
  lp.ineq_lhs = halfspaces.ineq_lhs;
  lp.ineq_rhs = halfspaces.ineq_rhs;
  lp.eq_lhs = halfspaces.eq_lhs;
  lp.eq_rhs = halfspaces.eq_rhs;
  LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::Unbounded) throw NumericalError("polytope support: unbounded");
  if (!sol.ok()) throw NumericalError("polytope support: LP failed");
  return {-sol.value, sol.x};
}

namespace {

// Gaussian elimination; returns false when singular.
bool solve_square(Matrix a, Vec b, Vec& x) {
  const int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    double best = 1e-10;
    for (int r = col; r < n; ++r)
      if (std::abs(a[r][col]) > best) {
        best = std::abs(a[r][col]);
        piv = r;
      }
    if (piv < 0) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    const double inv = 1.0 / a[col][col];
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] * inv;
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

}  // namespace

Matrix Polytope::vertices(std::int64_t cap) const {
  if (vertex_form) return vertex_list;

  const int m = static_cast<int>(halfspaces.ineq_lhs.size());
  const int e = static_cast<int>(halfspaces.eq_lhs.size());
  const int need = dim - e;
  if (need < 0) throw ValidationError("polytope vertices: more equalities than dimensions");

  // Count subsets C(m, need) against the cap before enumerating.
  double count = 1.0;
  for (int i = 0; i < need; ++i) count *= static_cast<double>(m - i) / (i + 1);
  if (count > static_cast<double>(cap))
    throw CapExceededError("polytope vertices: basic-solution count exceeds cap",
                           static_cast<std::int64_t>(count));

  Matrix out;
  std::vector<int> pick(need);
  for (int i = 0; i < need; ++i) pick[i] = i;
  auto advance = [&]() {
    int i = need - 1;
    while (i >= 0 && pick[i] == m - need + i) --i;
    if (i < 0) return false;
    ++pick[i];
    for (int j = i + 1; j < need; ++j) pick[j] = pick[j - 1] + 1;
    return true;
  };

  if (need == 0) {
    Vec x;
    if (e > 0 && solve_square(halfspaces.eq_lhs, halfspaces.eq_rhs, x)) out.push_back(x);
    return out;
  }
  if (m < need) return out;

  do {
    Matrix a(dim, Vec(dim, 0.0));
    Vec b(dim, 0.0);
    for (int i = 0; i < e; ++i) {
      a[i] = halfspaces.eq_lhs[i];
      b[i] = halfspaces.eq_rhs[i];
    }
    for (int i = 0; i < need; ++i) {
      a[e + i] = halfspaces.ineq_lhs[pick[i]];
      b[e + i] = halfspaces.ineq_rhs[pick[i]];
    }
    Vec x;
    if (!solve_square(std::move(a), std::move(b), x)) continue;
    bool ok = true;
    for (int r = 0; r < m && ok; ++r) {
      double dot = 0.0;
      for (int d = 0; d < dim; ++d) dot += halfspaces.ineq_lhs[r][d] * x[d];
      if (dot > halfspaces.ineq_rhs[r] + 1e-9) ok = false;
    }
    if (!ok) continue;
    bool dup = false;
    for (const Vec& v : out) {
      double dist = 0.0;
      for (int d = 0; d < dim; ++d) dist = std::max(dist, std::abs(v[d] - x[d]));
      if (dist <= 1e-9) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(std::move(x));
  } while (advance());
  return out;
}

std::vector<std::string> Polytope::validate() const {
  std::vector<std::string> out;
  if (vertex_form) {
    if (vertex_list.empty()) out.push_back("polytope: empty vertex list");
    for (const Vec& v : vertex_list) {
      if (static_cast<int>(v.size()) != dim) out.push_back("polytope: vertex dimension mismatch");
      for (double x : v)
        if (!std::isfinite(x)) out.push_back("polytope: non-finite vertex coordinate");
    }
  } else {
    for (const Vec& row : halfspaces.ineq_lhs)
      if (static_cast<int>(row.size()) != dim) out.push_back("polytope: halfspace row dimension mismatch");
    for (const Vec& row : halfspaces.eq_lhs)
      if (static_cast<int>(row.size()) != dim) out.push_back("polytope: equality row dimension mismatch");
    if (halfspaces.ineq_lhs.size() != halfspaces.ineq_rhs.size() ||
        halfspaces.eq_lhs.size() != halfspaces.eq_rhs.size())
      out.push_back("polytope: rhs count mismatch");
    if (out.empty() && !feasible()) out.push_back("polytope: infeasible halfspace system");
  }
  return out;
}

std::vector<std::string> UnionOfPolytopes::validate() const {
  std::vector<std::string> out;
  if (pieces.empty()) {
    out.push_back("union: no pieces");
    return out;
  }
  const int d = pieces[0].dim;
  for (const Polytope& p : pieces) {
    if (p.dim != d) out.push_back("union: mixed dimensions");
    auto sub = p.validate();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

}  // namespace drmdp
