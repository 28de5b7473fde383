#include "drmdp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

namespace drmdp {
namespace {

// Standard-form problem: minimize c.y s.t. A y = b, y >= 0, plus a constant
// objective shift from variable substitutions.
struct StandardForm {
  Matrix a;
  Vec b;
  Vec c;
  double shift = 0.0;
  std::vector<int> slack_col;  // per row: slack column usable as initial basis, or -1
  // Mapping back to original variables: x[i] = base[i] + sign[i]*y[col[i]]
  // (- y[neg_col[i]] for free variables).
  Vec base;
  std::vector<int> col;
  Vec sign;
  std::vector<int> neg_col;
  int num_rows() const { return static_cast<int>(a.size()); }
  int num_cols() const { return static_cast<int>(c.size()); }
};

StandardForm to_standard_form(const LinearProgram& lp) {
  const int n = lp.num_vars();
  Vec lower = lp.lower.empty() ? Vec(n, 0.0) : lp.lower;
  Vec upper = lp.upper.empty() ? Vec(n, kInf) : lp.upper;
  if (static_cast<int>(lower.size()) != n || static_cast<int>(upper.size()) != n)
    throw ValidationError("lp: bounds dimension mismatch");
  for (int i = 0; i < n; ++i)
    if (lower[i] > upper[i]) throw ValidationError("lp: lower > upper for variable " + std::to_string(i));

  StandardForm sf;
  sf.base.assign(n, 0.0);
  sf.col.assign(n, -1);
  sf.sign.assign(n, 1.0);
  sf.neg_col.assign(n, -1);

  int cols = 0;
  std::vector<std::pair<int, double>> extra_upper;  // (var, residual bound)
  for (int i = 0; i < n; ++i) {
    if (std::isfinite(lower[i])) {
      sf.base[i] = lower[i];
      sf.col[i] = cols++;
      if (std::isfinite(upper[i])) extra_upper.push_back({i, upper[i] - lower[i]});
    } else if (std::isfinite(upper[i])) {
      // x = u - y
      sf.base[i] = upper[i];
      sf.sign[i] = -1.0;
      sf.col[i] = cols++;
    } else {
      sf.col[i] = cols++;
      sf.neg_col[i] = cols++;
    }
  }

  const int m_ineq = static_cast<int>(lp.ineq_lhs.size());
  const int m_eq = static_cast<int>(lp.eq_lhs.size());
  const int m_extra = static_cast<int>(extra_upper.size());
  const int slacks = m_ineq + m_extra;
  const int total_cols = cols + slacks;
  const int total_rows = m_ineq + m_extra + m_eq;

  sf.a.assign(total_rows, Vec(total_cols, 0.0));
  sf.b.assign(total_rows, 0.0);
  sf.c.assign(total_cols, 0.0);
  sf.slack_col.assign(total_rows, -1);

  for (int i = 0; i < n; ++i) {
    const double ci = lp.objective[i];
    sf.shift += ci * sf.base[i];
    sf.c[sf.col[i]] += ci * sf.sign[i];
    if (sf.neg_col[i] >= 0) sf.c[sf.neg_col[i]] -= ci;
  }

  auto fill_row = [&](Vec& row, const Vec& coeffs, double rhs, double& out_b) {
    if (static_cast<int>(coeffs.size()) != n) throw ValidationError("lp: constraint dimension mismatch");
    double shift = 0.0;
    for (int i = 0; i < n; ++i) {
      shift += coeffs[i] * sf.base[i];
      row[sf.col[i]] += coeffs[i] * sf.sign[i];
      if (sf.neg_col[i] >= 0) row[sf.neg_col[i]] -= coeffs[i];
    }
    out_b = rhs - shift;
  };

  int r = 0;
  for (int k = 0; k < m_ineq; ++k, ++r) {
    fill_row(sf.a[r], lp.ineq_lhs[k], lp.ineq_rhs[k], sf.b[r]);
    sf.a[r][cols + k] = 1.0;
    sf.slack_col[r] = cols + k;
  }
  for (int k = 0; k < m_extra; ++k, ++r) {
    sf.a[r][sf.col[extra_upper[k].first]] = 1.0;
    sf.b[r] = extra_upper[k].second;
    sf.a[r][cols + m_ineq + k] = 1.0;
    sf.slack_col[r] = cols + m_ineq + k;
  }
  for (int k = 0; k < m_eq; ++k, ++r) {
    fill_row(sf.a[r], lp.eq_lhs[k], lp.eq_rhs[k], sf.b[r]);
  }
  return sf;
}

// Full-tableau two-phase simplex.
class Tableau {
 public:
  explicit Tableau(StandardForm sf) : sf_(std::move(sf)) {
    m_ = sf_.num_rows();
    n_ = sf_.num_cols();
    for (int r = 0; r < m_; ++r) {
      if (sf_.b[r] < 0) {
        for (double& v : sf_.a[r]) v = -v;
        sf_.b[r] = -sf_.b[r];
        sf_.slack_col[r] = -1;  // slack coefficient flipped to -1, unusable as basis
      }
    }
    basis_.assign(m_, -1);
    art_col_.assign(m_, -1);
    int art = 0;
    for (int r = 0; r < m_; ++r) {
      if (sf_.slack_col[r] >= 0) {
        basis_[r] = sf_.slack_col[r];
      } else {
        art_col_[r] = n_ + art;
        basis_[r] = n_ + art;
        ++art;
      }
    }
    num_art_ = art;
    width_ = n_ + num_art_ + 1;  // + rhs column
    tab_.assign(m_, Vec(width_, 0.0));
    for (int r = 0; r < m_; ++r) {
      std::copy(sf_.a[r].begin(), sf_.a[r].end(), tab_[r].begin());
      if (art_col_[r] >= 0) tab_[r][art_col_[r]] = 1.0;
      tab_[r][width_ - 1] = sf_.b[r];
    }
  }

  LpStatus run() {
    if (num_art_ > 0) {
      Vec cost(width_ - 1, 0.0);
      for (int r = 0; r < m_; ++r)
        if (art_col_[r] >= 0) cost[art_col_[r]] = 1.0;
      LpStatus s = optimize(cost, /*phase1=*/true);
      if (s != LpStatus::Optimal) return s;
      if (phase_objective_ > kFeasTol) return LpStatus::Infeasible;
      if (!expel_artificials()) return LpStatus::Degenerate;
    }
    Vec cost(width_ - 1, 0.0);
    std::copy(sf_.c.begin(), sf_.c.end(), cost.begin());
    return optimize(cost, /*phase1=*/false);
  }

  Vec solution_y() const {
    Vec y(n_, 0.0);
    for (int r = 0; r < m_; ++r)
      if (basis_[r] < n_) y[basis_[r]] = tab_[r][width_ - 1];
    return y;
  }

 private:
  LpStatus optimize(const Vec& cost, bool phase1) {
    Vec z(width_, 0.0);
    for (int j = 0; j < width_ - 1; ++j) z[j] = cost[j];
    for (int r = 0; r < m_; ++r) {
      const double cb = cost[basis_[r]];
      if (cb != 0.0)
        for (int j = 0; j < width_; ++j) z[j] -= cb * tab_[r][j];
    }

    const int max_iter = 2000 + 200 * (m_ + width_);
    int stall = 0;
    double last_obj = -z[width_ - 1];
    for (int iter = 0; iter < max_iter; ++iter) {
      // Dantzig pricing with lowest-index ties; Bland after 500 stalls.
      const bool bland = stall >= 500;
      int enter = -1;
      if (bland) {
        for (int j = 0; j < width_ - 1; ++j) {
          if (j >= n_ && !phase1) continue;
          if (z[j] < -kPivotTol) {
            enter = j;
            break;
          }
        }
      } else {
        double best = -kPivotTol;
        for (int j = 0; j < width_ - 1; ++j) {
          if (j >= n_ && !phase1) continue;
          if (z[j] < best) {
            best = z[j];
            enter = j;
          }
        }
      }
      if (enter < 0) {
        phase_objective_ = -z[width_ - 1];
        return LpStatus::Optimal;
      }
      int leave = -1;
      double best_ratio = kInf;
      for (int r = 0; r < m_; ++r) {
        const double a = tab_[r][enter];
        if (a > kPivotTol) {
          const double ratio = tab_[r][width_ - 1] / a;
          if (ratio < best_ratio - 1e-12 ||
              (ratio < best_ratio + 1e-12 && (leave < 0 || basis_[r] < basis_[leave]))) {
            best_ratio = ratio;
            leave = r;
          }
        }
      }
      if (leave < 0) return phase1 ? LpStatus::Degenerate : LpStatus::Unbounded;
      if (std::abs(tab_[leave][enter]) < kPivotBreakdown) return LpStatus::Degenerate;
      pivot(leave, enter, z);
      const double obj = -z[width_ - 1];
      if (obj < last_obj - 1e-12)
        stall = 0;
      else
        ++stall;
      last_obj = obj;
    }
    return LpStatus::Degenerate;
  }

  void pivot(int r, int s, Vec& z) {
    Vec& prow = tab_[r];
    const double inv = 1.0 / prow[s];
    for (double& v : prow) v *= inv;
    prow[s] = 1.0;
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = tab_[i][s];
      if (f != 0.0) {
        Vec& row = tab_[i];
        for (int j = 0; j < width_; ++j) row[j] -= f * prow[j];
        row[s] = 0.0;
      }
    }
    const double fz = z[s];
    if (fz != 0.0) {
      for (int j = 0; j < width_; ++j) z[j] -= fz * prow[j];
      z[s] = 0.0;
    }
    basis_[r] = s;
  }

  // After phase 1, pivot lingering artificial basics onto structural columns;
  // rows with no eligible column are redundant and stay parked at zero.
  bool expel_artificials() {
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_) continue;
      int s = -1;
      for (int j = 0; j < n_; ++j) {
        if (std::abs(tab_[r][j]) > kFeasTol) {
          s = j;
          break;
        }
      }
      if (s < 0) continue;
      if (std::abs(tab_[r][s]) < kPivotBreakdown) return false;
      Vec dummy(width_, 0.0);
      pivot(r, s, dummy);
    }
    return true;
  }

  StandardForm sf_;
  Matrix tab_;
  std::vector<int> basis_;
  std::vector<int> art_col_;
  int m_ = 0, n_ = 0, num_art_ = 0, width_ = 0;
  double phase_objective_ = 0.0;
};

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  const int n = lp.num_vars();
  if (lp.ineq_lhs.size() != lp.ineq_rhs.size() || lp.eq_lhs.size() != lp.eq_rhs.size())
    throw ValidationError("lp: row/rhs count mismatch");

  StandardForm sf = to_standard_form(lp);
  Tableau tab(sf);
  LpSolution out;
  out.status = tab.run();
  if (out.status != LpStatus::Optimal) return out;

  const Vec y = tab.solution_y();
  out.x.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    out.x[i] = sf.base[i] + sf.sign[i] * y[sf.col[i]];
    if (sf.neg_col[i] >= 0) out.x[i] -= y[sf.neg_col[i]];
  }
  double value = 0.0;
  for (int i = 0; i < n; ++i) value += lp.objective[i] * out.x[i];
  out.value = value;

  // Never report an infeasible point as optimal.
  for (std::size_t r = 0; r < lp.ineq_lhs.size(); ++r) {
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += lp.ineq_lhs[r][i] * out.x[i];
    if (dot > lp.ineq_rhs[r] + kFeasTol) {
      out.status = LpStatus::Degenerate;
      return out;
    }
  }
  for (std::size_t r = 0; r < lp.eq_lhs.size(); ++r) {
    double dot = 0.0;
    for (int i = 0; i < n; ++i) dot += lp.eq_lhs[r][i] * out.x[i];
    if (std::abs(dot - lp.eq_rhs[r]) > kFeasTol) {
      out.status = LpStatus::Degenerate;
      return out;
    }
  }
  return out;
}

namespace {

void check_matrix(const Matrix& payoff) {
  if (payoff.empty() || payoff[0].empty()) throw ValidationError("matrix game: empty payoff");
  const std::size_t cols = payoff[0].size();
  for (const Vec& row : payoff) {
    if (row.size() != cols) throw ValidationError("matrix game: ragged payoff matrix");
    for (double v : row)
      if (!std::isfinite(v)) throw ValidationError("matrix game: non-finite entry");
  }
}

// Row player: variables (x, u), min u s.t. M^T x <= u 1, x in simplex.
LpSolution row_lp(const Matrix& payoff) {
  const int m = static_cast<int>(payoff.size());
  const int k = static_cast<int>(payoff[0].size());
  LinearProgram lp;
  lp.objective.assign(m + 1, 0.0);
  lp.objective[m] = 1.0;
  lp.lower.assign(m + 1, 0.0);
  lp.upper.assign(m + 1, kInf);
  lp.lower[m] = -kInf;
  for (int j = 0; j < k; ++j) {
    Vec row(m + 1, 0.0);
    for (int i = 0; i < m; ++i) row[i] = payoff[i][j];
    row[m] = -1.0;
    lp.add_ineq(std::move(row), 0.0);
  }
  Vec sum(m + 1, 0.0);
  std::fill(sum.begin(), sum.begin() + m, 1.0);
  lp.add_eq(std::move(sum), 1.0);
  return solve_lp(lp);
}

// Column player: variables (y, v), max v s.t. v <= M y, y in simplex.
LpSolution col_lp(const Matrix& payoff) {
  const int m = static_cast<int>(payoff.size());
  const int k = static_cast<int>(payoff[0].size());
  LinearProgram lp;
  lp.objective.assign(k + 1, 0.0);
  lp.objective[k] = -1.0;
  lp.lower.assign(k + 1, 0.0);
  lp.upper.assign(k + 1, kInf);
  lp.lower[k] = -kInf;
  for (int i = 0; i < m; ++i) {
    Vec row(k + 1, 0.0);
    for (int j = 0; j < k; ++j) row[j] = -payoff[i][j];
    row[k] = 1.0;
    lp.add_ineq(std::move(row), 0.0);
  }
  Vec sum(k + 1, 0.0);
  std::fill(sum.begin(), sum.begin() + k, 1.0);
  lp.add_eq(std::move(sum), 1.0);
  return solve_lp(lp);
}

Vec clip_simplex(Vec v) {
  double total = 0.0;
  for (double& x : v) {
    if (x < 0.0) x = 0.0;
    total += x;
  }
  if (total > 0.0)
    for (double& x : v) x /= total;
  return v;
}

}  // namespace

GameSolution solve_matrix_game(const Matrix& payoff) {
  check_matrix(payoff);
  const int m = static_cast<int>(payoff.size());
  const int k = static_cast<int>(payoff[0].size());

  LpSolution row = row_lp(payoff);
  if (!row.ok()) throw NumericalError("matrix game: row LP failed");
  LpSolution col = col_lp(payoff);
  if (!col.ok()) throw NumericalError("matrix game: column LP failed");

  const double minmax = row.value;
  const double maxmin = -col.value;
  if (std::abs(minmax - maxmin) > 1e-8)
    throw NumericalError("matrix game: minmax/maxmin disagree beyond 1e-8");

  GameSolution out;
  out.value = minmax;
  out.minimizer = clip_simplex(Vec(row.x.begin(), row.x.begin() + m));
  out.maximizer = clip_simplex(Vec(col.x.begin(), col.x.begin() + k));
  out.is_saddle = true;
  out.piece_index = 0;
  return out;
}

MinmaxResult minmax_over_union(const std::vector<Matrix>& pieces, int action_count) {
  if (pieces.empty()) throw ValidationError("minmax_over_union: no pieces");
  for (const Matrix& piece : pieces) {
    if (piece.empty()) throw ValidationError("minmax_over_union: empty piece");
    for (const Vec& v : piece)
      if (static_cast<int>(v.size()) != action_count)
        throw ValidationError("minmax_over_union: vertex column size != action count");
  }

  // Primal: one matrix game over the pooled vertex columns.
  Matrix pooled(action_count);
  for (const Matrix& piece : pieces)
    for (const Vec& v : piece)
      for (int a = 0; a < action_count; ++a) pooled[a].push_back(v[a]);
  GameSolution primal = solve_matrix_game(pooled);

  // Dual: nature commits to one piece and a point of its hull.
  GameSolution dual;
  dual.value = -kInf;
  for (int p = 0; p < static_cast<int>(pieces.size()); ++p) {
    Matrix mat(action_count, Vec(pieces[p].size()));
    for (std::size_t v = 0; v < pieces[p].size(); ++v)
      for (int a = 0; a < action_count; ++a) mat[a][v] = pieces[p][v][a];
    GameSolution g = solve_matrix_game(mat);
    if (g.value > dual.value + 1e-12) {
      dual = g;
      dual.piece_index = p;
    }
  }

  const bool saddle = std::abs(primal.value - dual.value) <= kSaddleTol;
  primal.is_saddle = saddle;
  dual.is_saddle = saddle;
  return {std::move(primal), std::move(dual)};
}

double hull_l1_distance(const Vec& point, const Matrix& vertices) {
  if (vertices.empty()) throw ValidationError("hull_l1_distance: no vertices");
  const int d = static_cast<int>(point.size());
  const int k = static_cast<int>(vertices.size());
  for (const Vec& v : vertices)
    if (static_cast<int>(v.size()) != d) throw ValidationError("hull_l1_distance: dimension mismatch");

  // min sum(e+ + e-) s.t. sum_i w_i v_i + e+ - e- = point, w in simplex.
  const int nv = k + 2 * d;
  LinearProgram lp;
  lp.objective.assign(nv, 0.0);
  for (int j = k; j < nv; ++j) lp.objective[j] = 1.0;
  lp.lower.assign(nv, 0.0);
  lp.upper.assign(nv, kInf);
  for (int dd = 0; dd < d; ++dd) {
    Vec row(nv, 0.0);
    for (int i = 0; i < k; ++i) row[i] = vertices[i][dd];
    row[k + dd] = 1.0;
    row[k + d + dd] = -1.0;
    lp.add_eq(std::move(row), point[dd]);
  }
  Vec sum(nv, 0.0);
  std::fill(sum.begin(), sum.begin() + k, 1.0);
  lp.add_eq(std::move(sum), 1.0);

  LpSolution sol = solve_lp(lp);
  if (!sol.ok()) throw NumericalError("hull_l1_distance: membership LP failed");
  return sol.value;
}

bool in_hull(const Vec& point, const Matrix& vertices, double tol) {
  return hull_l1_distance(point, vertices) <= tol;
}

}  // namespace drmdp
