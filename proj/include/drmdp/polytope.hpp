#ifndef DRMDP_POLYTOPE_HPP
#define DRMDP_POLYTOPE_HPP

#include <utility>
#include <vector>

#include "drmdp/common.hpp"

namespace drmdp {

// A x <= b plus equality rows E x = f.
struct Halfspaces {
  Matrix ineq_lhs;
  Vec ineq_rhs;
  Matrix eq_lhs;
  Vec eq_rhs;
};

// Convex body in R^dim, held either as a vertex list or a halfspace system.
// All geometry goes through vertex lists and LPs; halfspace bodies expose
// their vertices by enumerating basic feasible solutions (fine at the
// problem sizes this library targets).
struct Polytope {
  int dim = 0;
  Matrix vertex_list;          // nonempty iff vertex form
  Halfspaces halfspaces;       // used iff vertex_list is empty
  bool vertex_form = true;

  static Polytope from_vertices(Matrix vertices);
  static Polytope from_halfspaces(int dim, Halfspaces hs);

  bool feasible() const;  // vertex form: nonempty; halfspace form: LP
  // max w.x over the polytope, with an attaining point (a vertex / basic
  // solution). Lowest-index tie break in vertex form.
  std::pair<double, Vec> support(const Vec& w) const;
  // Vertices; for halfspace form enumerates basic feasible solutions
  // (throws CapExceededError if the subset count exceeds `cap`).
  Matrix vertices(std::int64_t cap = kDefaultEnumCap) const;

  std::vector<std::string> validate() const;
};

struct UnionOfPolytopes {
  std::vector<Polytope> pieces;

  int dim() const { return pieces.empty() ? 0 : pieces[0].dim; }
  std::vector<std::string> validate() const;
};

}  // namespace drmdp

#endif  // DRMDP_POLYTOPE_HPP
