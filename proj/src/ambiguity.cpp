#include "drmdp/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "drmdp/lp.hpp"

namespace drmdp {

const char* model_tag(const StageModel& model) {
  struct Visitor {
    const char* operator()(const SaRectModel&) const { return "sa_rect"; }
    const char* operator()(const SRectModel&) const { return "s_rect"; }
    const char* operator()(const RRectModel&) const { return "r_rect"; }
    const char* operator()(const SrRectModel&) const { return "sr_rect"; }
    const char* operator()(const FiniteKernelSetModel&) const { return "finite"; }
    const char* operator()(const SingletonModel&) const { return "singleton"; }
  };
  return std::visit(Visitor{}, model);
}

int joint_dim(const MdpInstance& inst, int t, int s) {
  return inst.num_actions(t, s) * inst.num_states(t + 1);
}

Vec flatten_rows(const std::vector<Vec>& rows_per_action) {
  Vec out;
  for (const Vec& row : rows_per_action) out.insert(out.end(), row.begin(), row.end());
  return out;
}

std::vector<Vec> unflatten_joint(const Vec& joint, int num_actions, int num_next) {
  if (static_cast<int>(joint.size()) != num_actions * num_next)
    throw ValidationError("unflatten_joint: size mismatch");
  std::vector<Vec> rows(num_actions);
  for (int a = 0; a < num_actions; ++a)
    rows[a] = Vec(joint.begin() + a * num_next, joint.begin() + (a + 1) * num_next);
  return rows;
}

namespace {

void check_cap(double count, std::int64_t cap, const char* what) {
  if (count > static_cast<double>(cap))
    throw CapExceededError(std::string(what) + ": combination count exceeds cap",
                           static_cast<std::int64_t>(std::min(count, 9e18)));
}

bool row_is_distribution(const Vec& row, std::string* why = nullptr) {
  double sum = 0.0;
  for (double v : row) {
    if (v < -kProbTol || v > 1.0 + kProbTol) {
      if (why) *why = "entry " + std::to_string(v) + " out of [0,1]";
      return false;
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kProbTol) {
    if (why) *why = "row sums to " + std::to_string(sum);
    return false;
  }
  return true;
}

Matrix dedupe_vertices(Matrix verts, double tol = 1e-12) {
  Matrix out;
  for (Vec& v : verts) {
    bool dup = false;
    for (const Vec& u : out) {
      double dist = 0.0;
      for (std::size_t d = 0; d < u.size(); ++d) dist = std::max(dist, std::abs(u[d] - v[d]));
      if (dist <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) out.push_back(std::move(v));
  }
  return out;
}

// Odometer over mixed radices; calls fn with the index tuple.
template <typename Fn>
void for_each_combo(const std::vector<int>& radices, Fn&& fn) {
  std::vector<int> idx(radices.size(), 0);
  for (int r : radices)
    if (r <= 0) return;
  while (true) {
    fn(idx);
    int pos = static_cast<int>(radices.size()) - 1;
    while (pos >= 0) {
      if (++idx[pos] < radices[pos]) break;
      idx[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
}

double combo_count(const std::vector<int>& radices) {
  double c = 1.0;
  for (int r : radices) c *= r;
  return c;
}

// Compositions of the r-rectangular rows at (s, a) for one factor-vertex pick.
Vec compose_r_row(const RRectModel& r, int s, int a, const std::vector<int>& pick, int num_next) {
  Vec row(num_next, 0.0);
  for (std::size_t i = 0; i < r.factors.size(); ++i) {
    const double k = r.coeff[s][a][i];
    if (k == 0.0) continue;
    const Vec& w = r.factors[i][pick[i]];
    for (int d = 0; d < num_next; ++d) row[d] += k * w[d];
  }
  return row;
}

std::vector<int> r_factor_radices(const RRectModel& r) {
  std::vector<int> radices;
  radices.reserve(r.factors.size());
  for (const Matrix& w : r.factors) radices.push_back(static_cast<int>(w.size()));
  return radices;
}

// Joint vertices of the r-part marginal at state s (one per factor combo).
Matrix r_marginal_vertices(const RRectModel& r, const MdpInstance& inst, int t, int s,
                           std::int64_t cap) {
  const int na = inst.num_actions(t, s);
  const int nn = inst.num_states(t + 1);
  const auto radices = r_factor_radices(r);
  check_cap(combo_count(radices), cap, "r-rect marginal");
  Matrix out;
  for_each_combo(radices, [&](const std::vector<int>& pick) {
    Vec joint;
    joint.reserve(na * nn);
    for (int a = 0; a < na; ++a) {
      Vec row = compose_r_row(r, s, a, pick, nn);
      joint.insert(joint.end(), row.begin(), row.end());
    }
    out.push_back(std::move(joint));
  });
  return dedupe_vertices(std::move(out));
}

Matrix sa_marginal_product_vertices(const SaRectModel& m, const MdpInstance& inst, int t, int s,
                                    std::int64_t cap) {
  const int na = inst.num_actions(t, s);
  std::vector<Matrix> per_action(na);
  std::vector<int> radices(na);
  for (int a = 0; a < na; ++a) {
    per_action[a] = m.sets[s][a].vertices(cap);
    if (per_action[a].empty()) throw ValidationError("sa-rect: empty polytope at a state-action pair");
    radices[a] = static_cast<int>(per_action[a].size());
  }
  check_cap(combo_count(radices), cap, "sa-rect marginal");
  Matrix out;
  for_each_combo(radices, [&](const std::vector<int>& pick) {
    Vec joint;
    for (int a = 0; a < na; ++a)
      joint.insert(joint.end(), per_action[a][pick[a]].begin(), per_action[a][pick[a]].end());
    out.push_back(std::move(joint));
  });
  return out;
}

Vec blend(const Vec& a, const Vec& b, double beta) {
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = beta * a[i] + (1.0 - beta) * b[i];
  return out;
}

}  // namespace

std::vector<Matrix> full_marginal_pieces(const StageModel& model, const MdpInstance& inst, int t,
                                         int s, std::int64_t cap) {
  if (const auto* m = std::get_if<SingletonModel>(&model)) {
    return {Matrix{flatten_rows(m->kernel.rows[s])}};
  }
  if (const auto* m = std::get_if<FiniteKernelSetModel>(&model)) {
    Matrix points;
    for (const StageKernel& k : m->kernels) points.push_back(flatten_rows(k.rows[s]));
    points = dedupe_vertices(std::move(points), 1e-12);
    if (m->convex_hull) return {std::move(points)};
    std::vector<Matrix> pieces;
    for (Vec& p : points) pieces.push_back(Matrix{std::move(p)});
    return pieces;
  }
  if (const auto* m = std::get_if<SaRectModel>(&model)) {
    return {sa_marginal_product_vertices(*m, inst, t, s, cap)};
  }
  if (const auto* m = std::get_if<SRectModel>(&model)) {
    std::vector<Matrix> pieces;
    for (const Polytope& p : m->sets[s].pieces) pieces.push_back(p.vertices(cap));
    return pieces;
  }
  if (const auto* m = std::get_if<RRectModel>(&model)) {
    return {r_marginal_vertices(*m, inst, t, s, cap)};
  }
  const auto& m = std::get<SrRectModel>(model);
  const Matrix r_verts = r_marginal_vertices(m.r_part, inst, t, s, cap);
  std::vector<Matrix> pieces;
  for (const Polytope& p : m.s_part.sets[s].pieces) {
    const Matrix s_verts = p.vertices(cap);
    check_cap(static_cast<double>(s_verts.size()) * r_verts.size(), cap, "sr-rect marginal");
    Matrix piece;
    for (const Vec& vs : s_verts)
      for (const Vec& vr : r_verts) piece.push_back(blend(vs, vr, m.beta));
    pieces.push_back(dedupe_vertices(std::move(piece)));
  }
  return pieces;
}

UnionOfPolytopes marginalize_statewise(const StageModel& model, const MdpInstance& inst, int t,
                                       int s, std::int64_t cap) {
  UnionOfPolytopes out;
  for (Matrix& piece : full_marginal_pieces(model, inst, t, s, cap))
    out.pieces.push_back(Polytope::from_vertices(std::move(piece)));
  return out;
}

SRectModel s_rect_enlargement(const StageModel& model, const MdpInstance& inst, int t,
                              std::int64_t cap) {
  SRectModel out;
  out.sets.resize(inst.num_states(t));
  for (int s = 0; s < inst.num_states(t); ++s)
    out.sets[s] = marginalize_statewise(model, inst, t, s, cap);
  return out;
}

std::vector<std::string> validate_model(const StageModel& model, const MdpInstance& inst, int t,
                                        std::int64_t cap) {
  std::vector<std::string> out;
  const int ns = inst.num_states(t);
  const int nn = inst.num_states(t + 1);

  // Structural checks first.
  if (const auto* m = std::get_if<SaRectModel>(&model)) {
    if (static_cast<int>(m->sets.size()) != ns) {
      out.push_back("sa_rect stage " + std::to_string(t + 1) + ": state count mismatch");
      return out;
    }
    for (int s = 0; s < ns; ++s) {
      if (static_cast<int>(m->sets[s].size()) != inst.num_actions(t, s)) {
        out.push_back("sa_rect (" + std::to_string(t + 1) + ", " + inst.states[t][s] +
                      "): action count mismatch");
        return out;
      }
      for (int a = 0; a < inst.num_actions(t, s); ++a) {
        if (m->sets[s][a].dim != nn)
          out.push_back("sa_rect (" + std::to_string(t + 1) + ", " + inst.states[t][s] + ", " +
                        inst.actions[t][s][a] + "): polytope dimension != next-state count");
        auto sub = m->sets[s][a].validate();
        out.insert(out.end(), sub.begin(), sub.end());
      }
    }
  } else if (const auto* m = std::get_if<SRectModel>(&model)) {
    if (static_cast<int>(m->sets.size()) != ns) {
      out.push_back("s_rect stage " + std::to_string(t + 1) + ": state count mismatch");
      return out;
    }
    for (int s = 0; s < ns; ++s) {
      if (m->sets[s].dim() != joint_dim(inst, t, s))
        out.push_back("s_rect (" + std::to_string(t + 1) + ", " + inst.states[t][s] +
                      "): joint dimension mismatch");
      auto sub = m->sets[s].validate();
      out.insert(out.end(), sub.begin(), sub.end());
    }
  } else if (const auto* m = std::get_if<RRectModel>(&model)) {
    if (m->factors.empty()) out.push_back("r_rect: no factors");
    for (const Matrix& w : m->factors) {
      if (w.empty()) out.push_back("r_rect: empty factor vertex list");
      for (const Vec& v : w)
        if (static_cast<int>(v.size()) != nn) out.push_back("r_rect: factor dimension mismatch");
    }
    if (static_cast<int>(m->coeff.size()) != ns) {
      out.push_back("r_rect stage " + std::to_string(t + 1) + ": coefficient state count mismatch");
      return out;
    }
    for (int s = 0; s < ns; ++s) {
      if (static_cast<int>(m->coeff[s].size()) != inst.num_actions(t, s)) {
        out.push_back("r_rect (" + std::to_string(t + 1) + ", " + inst.states[t][s] +
                      "): coefficient action count mismatch");
        return out;
      }
      for (int a = 0; a < inst.num_actions(t, s); ++a) {
        if (m->coeff[s][a].size() != m->factors.size())
          out.push_back("r_rect (" + std::to_string(t + 1) + ", " + inst.states[t][s] + ", " +
                        inst.actions[t][s][a] + "): coefficient count != factor count");
        for (double k : m->coeff[s][a])
          if (k < 0.0)
            out.push_back("r_rect (" + std::to_string(t + 1) + ", " + inst.states[t][s] + ", " +
                          inst.actions[t][s][a] + "): negative coefficient");
      }
    }
  } else if (const auto* m = std::get_if<SrRectModel>(&model)) {
    if (m->beta < 0.0 || m->beta > 1.0) out.push_back("sr_rect: beta outside [0,1]");
    auto s_sub = validate_model(StageModel{m->s_part}, inst, t, cap);
    auto r_sub = validate_model(StageModel{m->r_part}, inst, t, cap);
    out.insert(out.end(), s_sub.begin(), s_sub.end());
    out.insert(out.end(), r_sub.begin(), r_sub.end());
  } else if (const auto* m = std::get_if<FiniteKernelSetModel>(&model)) {
    if (m->kernels.empty()) out.push_back("finite kernel set: empty");
    for (const StageKernel& k : m->kernels) {
      if (static_cast<int>(k.rows.size()) != ns) {
        out.push_back("finite kernel set stage " + std::to_string(t + 1) + ": state count mismatch");
        return out;
      }
      for (int s = 0; s < ns; ++s)
        if (static_cast<int>(k.rows[s].size()) != inst.num_actions(t, s)) {
          out.push_back("finite kernel set (" + std::to_string(t + 1) + ", " + inst.states[t][s] +
                        "): action count mismatch");
          return out;
        }
    }
  } else if (const auto* m = std::get_if<SingletonModel>(&model)) {
    if (static_cast<int>(m->kernel.rows.size()) != ns) {
      out.push_back("singleton stage " + std::to_string(t + 1) + ": state count mismatch");
      return out;
    }
  }
  if (!out.empty()) return out;

  // Composed-vector validity on every extreme combination, per state.
  for (int s = 0; s < ns; ++s) {
    std::vector<Matrix> pieces;
    try {
      pieces = full_marginal_pieces(model, inst, t, s, cap);
    } catch (const CapExceededError& e) {
      out.push_back(std::string("stage ") + std::to_string(t + 1) + ", state " + inst.states[t][s] +
                    ": " + e.what());
      continue;
    }
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      for (const Vec& joint : pieces[p]) {
        const auto rows = unflatten_joint(joint, inst.num_actions(t, s), nn);
        for (int a = 0; a < inst.num_actions(t, s); ++a) {
          std::string why;
          if (!row_is_distribution(rows[a], &why))
            out.push_back("(" + std::to_string(t + 1) + ", " + inst.states[t][s] + ", " +
                          inst.actions[t][s][a] + ") piece " + std::to_string(p) + ": " + why);
        }
      }
    }
  }
  return out;
}

std::vector<std::string> validate_ambiguity(const AmbiguityModel& model, const MdpInstance& inst,
                                            std::int64_t cap) {
  std::vector<std::string> out;
  if (static_cast<int>(model.stages.size()) != inst.horizon) {
    out.push_back("ambiguity model stage count != horizon");
    return out;
  }
  for (int t = 0; t < inst.horizon; ++t) {
    auto sub = validate_model(model.stages[t], inst, t, cap);
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

std::vector<StageKernel> enumerate_extreme_kernels(const StageModel& model, const MdpInstance& inst,
                                                   int t, std::int64_t cap) {
  const int ns = inst.num_states(t);
  const int nn = inst.num_states(t + 1);

  if (const auto* m = std::get_if<SingletonModel>(&model)) return {m->kernel};
  if (const auto* m = std::get_if<FiniteKernelSetModel>(&model)) return m->kernels;

  if (const auto* m = std::get_if<RRectModel>(&model)) {
    const auto radices = r_factor_radices(*m);
    check_cap(combo_count(radices), cap, "r-rect extreme kernels");
    std::vector<StageKernel> out;
    for_each_combo(radices, [&](const std::vector<int>& pick) {
      StageKernel k;
      k.rows.resize(ns);
      for (int s = 0; s < ns; ++s) {
        k.rows[s].resize(inst.num_actions(t, s));
        for (int a = 0; a < inst.num_actions(t, s); ++a)
          k.rows[s][a] = compose_r_row(*m, s, a, pick, nn);
      }
      out.push_back(std::move(k));
    });
    return out;
  }

  if (const auto* m = std::get_if<SrRectModel>(&model)) {
    // The r-part couples the states through the shared factors, so the
    // extremes are per-state s-part vertex choices crossed with one global
    // factor combination.
    std::vector<Matrix> s_verts(ns);
    std::vector<int> radices;
    for (int s = 0; s < ns; ++s) {
      Matrix pool;
      for (const Polytope& p : m->s_part.sets[s].pieces)
        for (Vec& v : p.vertices(cap)) pool.push_back(std::move(v));
      s_verts[s] = dedupe_vertices(std::move(pool));
      radices.push_back(static_cast<int>(s_verts[s].size()));
    }
    const auto r_radices = r_factor_radices(m->r_part);
    radices.insert(radices.end(), r_radices.begin(), r_radices.end());
    check_cap(combo_count(radices), cap, "sr-rect extreme kernels");

    std::vector<StageKernel> out;
    for_each_combo(radices, [&](const std::vector<int>& pick) {
      const std::vector<int> r_pick(pick.begin() + ns, pick.end());
      StageKernel k;
      k.rows.resize(ns);
      for (int s = 0; s < ns; ++s) {
        const Vec& vs = s_verts[s][pick[s]];
        k.rows[s].resize(inst.num_actions(t, s));
        for (int a = 0; a < inst.num_actions(t, s); ++a) {
          Vec row = compose_r_row(m->r_part, s, a, r_pick, nn);
          for (int d = 0; d < nn; ++d)
            row[d] = m->beta * vs[a * nn + d] + (1.0 - m->beta) * row[d];
          k.rows[s][a] = std::move(row);
        }
      }
      out.push_back(std::move(k));
    });
    return out;
  }

  // The remaining models decompose per state: build per-state joint vertex
  // pools and take the cross product.
  std::vector<Matrix> per_state(ns);
  std::vector<int> radices(ns);
  double total = 1.0;
  for (int s = 0; s < ns; ++s) {
    Matrix pool;
    for (Matrix& piece : full_marginal_pieces(model, inst, t, s, cap))
      for (Vec& v : piece) pool.push_back(std::move(v));
    per_state[s] = dedupe_vertices(std::move(pool));
    radices[s] = static_cast<int>(per_state[s].size());
    total *= radices[s];
  }
  check_cap(total, cap, "extreme kernels");

  std::vector<StageKernel> out;
  for_each_combo(radices, [&](const std::vector<int>& pick) {
    StageKernel k;
    k.rows.resize(ns);
    for (int s = 0; s < ns; ++s)
      k.rows[s] = unflatten_joint(per_state[s][pick[s]], inst.num_actions(t, s), nn);
    out.push_back(std::move(k));
  });
  return out;
}

SrRectModel compose_sr(double beta, SRectModel s_part, RRectModel r_part, const MdpInstance& inst,
                       int t) {
  SrRectModel out{beta, std::move(s_part), std::move(r_part)};
  auto violations = validate_model(StageModel{out}, inst, t);
  if (!violations.empty()) {
    std::string msg = "compose_sr: invalid blend:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ValidationError(msg);
  }
  return out;
}

namespace {

double finite_set_distance(const std::vector<StageKernel>& kernels, const StageKernel& k) {
  double best = kInf;
  for (const StageKernel& cand : kernels) {
    double d = 0.0;
    for (std::size_t s = 0; s < cand.rows.size(); ++s)
      for (std::size_t a = 0; a < cand.rows[s].size(); ++a)
        for (std::size_t nxt = 0; nxt < cand.rows[s][a].size(); ++nxt)
          d += std::abs(cand.rows[s][a][nxt] - k.rows[s][a][nxt]);
    best = std::min(best, d);
  }
  return best;
}

Vec flatten_kernel(const StageKernel& k) {
  Vec out;
  for (const auto& per_s : k.rows)
    for (const auto& row : per_s) out.insert(out.end(), row.begin(), row.end());
  return out;
}

// Distance for models that decompose across states: sum of per-state
// distances, each the min over that state's pieces.
double statewise_distance(const StageModel& model, const MdpInstance& inst, int t,
                          const StageKernel& kernel, std::int64_t cap) {
  double total = 0.0;
  for (int s = 0; s < inst.num_states(t); ++s) {
    const Vec point = flatten_rows(kernel.rows[s]);
    double best = kInf;
    for (const Matrix& piece : full_marginal_pieces(model, inst, t, s, cap))
      best = std::min(best, hull_l1_distance(point, piece));
    total += best;
  }
  return total;
}

// min L1(target - (sum_i coeff * w_i per (s,a))) with w_i in conv(factors[i]).
double r_rect_distance(const RRectModel& m, const MdpInstance& inst, int t,
                       const StageKernel& kernel) {
  const int nn = inst.num_states(t + 1);
  const int nf = static_cast<int>(m.factors.size());
  std::vector<int> block(nf);
  int vars = 0;
  for (int i = 0; i < nf; ++i) {
    block[i] = vars;
    vars += static_cast<int>(m.factors[i].size());
  }
  int rows = 0;
  for (int s = 0; s < inst.num_states(t); ++s) rows += inst.num_actions(t, s) * nn;
  const int err_start = vars;
  vars += 2 * rows;

  LinearProgram lp;
  lp.objective.assign(vars, 0.0);
  for (int j = err_start; j < vars; ++j) lp.objective[j] = 1.0;
  lp.lower.assign(vars, 0.0);
  lp.upper.assign(vars, kInf);

  int row_idx = 0;
  for (int s = 0; s < inst.num_states(t); ++s) {
    for (int a = 0; a < inst.num_actions(t, s); ++a) {
      for (int d = 0; d < nn; ++d, ++row_idx) {
        Vec row(vars, 0.0);
        for (int i = 0; i < nf; ++i) {
          const double k = m.coeff[s][a][i];
          if (k == 0.0) continue;
          for (std::size_t v = 0; v < m.factors[i].size(); ++v)
            row[block[i] + v] += k * m.factors[i][v][d];
        }
        row[err_start + 2 * row_idx] = 1.0;
        row[err_start + 2 * row_idx + 1] = -1.0;
        lp.add_eq(std::move(row), kernel.rows[s][a][d]);
      }
    }
  }
  for (int i = 0; i < nf; ++i) {
    Vec row(vars, 0.0);
    for (std::size_t v = 0; v < m.factors[i].size(); ++v) row[block[i] + v] = 1.0;
    lp.add_eq(std::move(row), 1.0);
  }
  LpSolution sol = solve_lp(lp);
  if (!sol.ok()) throw NumericalError("r-rect membership LP failed");
  return sol.value;
}

// sr-rect membership: loop over per-state piece selections of the s-part and
// solve a joint LP with s-hull weights per state and factor-hull weights.
double sr_rect_distance(const SrRectModel& m, const MdpInstance& inst, int t,
                        const StageKernel& kernel, std::int64_t cap) {
  const int ns = inst.num_states(t);
  const int nn = inst.num_states(t + 1);
  const int nf = static_cast<int>(m.r_part.factors.size());
  std::vector<int> piece_counts(ns);
  for (int s = 0; s < ns; ++s) piece_counts[s] = static_cast<int>(m.s_part.sets[s].pieces.size());
  check_cap(combo_count(piece_counts), cap, "sr-rect membership piece selections");

  std::vector<std::vector<Matrix>> piece_verts(ns);
  for (int s = 0; s < ns; ++s)
    for (const Polytope& p : m.s_part.sets[s].pieces) piece_verts[s].push_back(p.vertices(cap));

  double best = kInf;
  for_each_combo(piece_counts, [&](const std::vector<int>& sel) {
    int vars = 0;
    std::vector<int> s_block(ns);
    for (int s = 0; s < ns; ++s) {
      s_block[s] = vars;
      vars += static_cast<int>(piece_verts[s][sel[s]].size());
    }
    std::vector<int> f_block(nf);
    for (int i = 0; i < nf; ++i) {
      f_block[i] = vars;
      vars += static_cast<int>(m.r_part.factors[i].size());
    }
    int rows = 0;
    for (int s = 0; s < ns; ++s) rows += inst.num_actions(t, s) * nn;
    const int err_start = vars;
    vars += 2 * rows;

    LinearProgram lp;
    lp.objective.assign(vars, 0.0);
    for (int j = err_start; j < vars; ++j) lp.objective[j] = 1.0;
    lp.lower.assign(vars, 0.0);
    lp.upper.assign(vars, kInf);

    int row_idx = 0;
    for (int s = 0; s < ns; ++s) {
      const Matrix& verts = piece_verts[s][sel[s]];
      for (int a = 0; a < inst.num_actions(t, s); ++a) {
        for (int d = 0; d < nn; ++d, ++row_idx) {
          Vec row(vars, 0.0);
          const int joint_idx = a * nn + d;
          for (std::size_t v = 0; v < verts.size(); ++v)
            row[s_block[s] + v] = m.beta * verts[v][joint_idx];
          for (int i = 0; i < nf; ++i) {
            const double k = m.r_part.coeff[s][a][i];
            if (k == 0.0) continue;
            for (std::size_t v = 0; v < m.r_part.factors[i].size(); ++v)
              row[f_block[i] + v] += (1.0 - m.beta) * k * m.r_part.factors[i][v][d];
          }
          row[err_start + 2 * row_idx] = 1.0;
          row[err_start + 2 * row_idx + 1] = -1.0;
          lp.add_eq(std::move(row), kernel.rows[s][a][d]);
        }
      }
    }
    for (int s = 0; s < ns; ++s) {
      Vec row(vars, 0.0);
      for (std::size_t v = 0; v < piece_verts[s][sel[s]].size(); ++v) row[s_block[s] + v] = 1.0;
      lp.add_eq(std::move(row), 1.0);
    }
    for (int i = 0; i < nf; ++i) {
      Vec row(vars, 0.0);
      for (std::size_t v = 0; v < m.r_part.factors[i].size(); ++v) row[f_block[i] + v] = 1.0;
      lp.add_eq(std::move(row), 1.0);
    }
    LpSolution sol = solve_lp(lp);
    if (sol.ok()) best = std::min(best, sol.value);
  });
  if (best == kInf) throw NumericalError("sr-rect membership LP failed");
  return best;
}

}  // namespace

double kernel_membership_distance(const StageModel& model, const MdpInstance& inst, int t,
                                  const StageKernel& kernel, std::int64_t cap) {
  if (const auto* m = std::get_if<SingletonModel>(&model))
    return finite_set_distance({m->kernel}, kernel);
  if (const auto* m = std::get_if<FiniteKernelSetModel>(&model)) {
    if (!m->convex_hull) return finite_set_distance(m->kernels, kernel);
    Matrix verts;
    for (const StageKernel& k : m->kernels) verts.push_back(flatten_kernel(k));
    return hull_l1_distance(flatten_kernel(kernel), verts);
  }
  if (const auto* m = std::get_if<RRectModel>(&model)) return r_rect_distance(*m, inst, t, kernel);
  if (const auto* m = std::get_if<SrRectModel>(&model))
    return sr_rect_distance(*m, inst, t, kernel, cap);
  // sa- and s-rectangular sets decompose across states.
  return statewise_distance(model, inst, t, kernel, cap);
}

namespace {

ProductProbeReport product_probe(const StageModel& model, const MdpInstance& inst, int t,
                                 std::int64_t cap, bool per_action) {
  ProductProbeReport report;
  const int ns = inst.num_states(t);
  const int nn = inst.num_states(t + 1);

  // Pool marginal vertices per component (per (s,a) or per s).
  std::vector<Matrix> comp;  // [component] -> vertex list
  std::vector<int> comp_state;            // owning state
  std::vector<int> comp_action;           // owning action (per_action only)
  for (int s = 0; s < ns; ++s) {
    Matrix pool;
    for (const Matrix& piece : full_marginal_pieces(model, inst, t, s, cap))
      for (const Vec& v : piece) pool.push_back(v);
    pool = dedupe_vertices(std::move(pool), 1e-9);
    if (per_action) {
      for (int a = 0; a < inst.num_actions(t, s); ++a) {
        Matrix rows;
        for (const Vec& joint : pool)
          rows.push_back(Vec(joint.begin() + a * nn, joint.begin() + (a + 1) * nn));
        comp.push_back(dedupe_vertices(std::move(rows), 1e-9));
        comp_state.push_back(s);
        comp_action.push_back(a);
      }
    } else {
      comp.push_back(std::move(pool));
      comp_state.push_back(s);
      comp_action.push_back(-1);
    }
  }

  std::vector<int> radices;
  for (const auto& c : comp) radices.push_back(static_cast<int>(c.size()));
  check_cap(combo_count(radices), cap, "product membership probe");

  double worst = 0.0;
  std::optional<StageKernel> witness;
  for_each_combo(radices, [&](const std::vector<int>& pick) {
    StageKernel k;
    k.rows.resize(ns);
    for (int s = 0; s < ns; ++s) k.rows[s].resize(inst.num_actions(t, s));
    for (std::size_t c = 0; c < comp.size(); ++c) {
      const Vec& v = comp[c][pick[c]];
      const int s = comp_state[c];
      if (per_action) {
        k.rows[s][comp_action[c]] = v;
      } else {
        k.rows[s] = unflatten_joint(v, inst.num_actions(t, s), nn);
      }
    }
    const double dist = kernel_membership_distance(model, inst, t, k, cap);
    if (dist > worst) {
      worst = dist;
      witness = k;
    }
  });

  if (worst > kMembershipTol) {
    report.conclusive = true;
    report.product_contained = false;
    report.witness = witness;
    report.witness_distance = worst;
    report.note = "a product combination of marginal vertices lies outside the set";
  } else {
    report.conclusive = false;
    report.product_contained = true;
    report.note = "all product combinations of marginal vertices are members";
  }
  return report;
}

}  // namespace

ProductProbeReport sa_product_membership_probe(const StageModel& model, const MdpInstance& inst,
                                               int t, std::int64_t cap) {
  return product_probe(model, inst, t, cap, /*per_action=*/true);
}

ProductProbeReport s_product_membership_probe(const StageModel& model, const MdpInstance& inst,
                                              int t, std::int64_t cap) {
  return product_probe(model, inst, t, cap, /*per_action=*/false);
}

AmbiguityModel singleton_ambiguity(const Kernel& kernel) {
  AmbiguityModel out;
  for (const StageKernel& st : kernel.stages) out.stages.push_back(SingletonModel{st});
  return out;
}

}  // namespace drmdp
