#ifndef DRMDP_AMBIGUITY_HPP
#define DRMDP_AMBIGUITY_HPP

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "drmdp/mdp.hpp"
#include "drmdp/polytope.hpp"

namespace drmdp {

// Structured per-stage ambiguity sets of transition kernels.
//
// State-wise marginals live in a flat "joint" space per (t, s): the
// concatenation over the actions of (s) of the conditional distribution over
// the next stage, index = a * |S_{t+1}| + s'.

// Independent polytope of next-state distributions per (state, action).
struct SaRectModel {
  std::vector<std::vector<Polytope>> sets;  // [s][a], dim |S_{t+1}|
};

// Per-state set in the joint space; unions cover the non-convex examples.
struct SRectModel {
  std::vector<UnionOfPolytopes> sets;  // [s], dim |A(s)| * |S_{t+1}|
};

// Kernels of the form P(.|s,a) = sum_i coeff[s][a][i] * w_i with w_i drawn
// from conv(factors[i]). Validity is enforced on the composed rows, not the
// factors, so factors need not be distributions themselves.
struct RRectModel {
  std::vector<Matrix> factors;          // factors[i]: vertex list in R^{|S_{t+1}|}
  std::vector<std::vector<Vec>> coeff;  // coeff[s][a][i] >= 0
};

// Minkowski blend beta * s_part + (1-beta) * r_part.
struct SrRectModel;

// Explicit kernels. With convex_hull the set is the polytope spanned by the
// listed kernels (used e.g. for noise-induced sets); otherwise the literal
// finite set.
struct FiniteKernelSetModel {
  std::vector<StageKernel> kernels;
  bool convex_hull = false;
};

struct SingletonModel {
  StageKernel kernel;
};

struct SrRectModel {
  double beta = 0.5;
  SRectModel s_part;
  RRectModel r_part;
};

using StageModel =
    std::variant<SaRectModel, SRectModel, RRectModel, SrRectModel, FiniteKernelSetModel, SingletonModel>;

struct AmbiguityModel {
  std::vector<StageModel> stages;  // size horizon
};

const char* model_tag(const StageModel& model);

int joint_dim(const MdpInstance& inst, int t, int s);
Vec flatten_rows(const std::vector<Vec>& rows_per_action);
std::vector<Vec> unflatten_joint(const Vec& joint, int num_actions, int num_next);

// Empty iff the model is structurally sound and every extreme combination
// composes to valid kernel rows (within kProbTol).
std::vector<std::string> validate_model(const StageModel& model, const MdpInstance& inst, int t,
                                        std::int64_t cap = kDefaultEnumCap);
std::vector<std::string> validate_ambiguity(const AmbiguityModel& model, const MdpInstance& inst,
                                            std::int64_t cap = kDefaultEnumCap);

// All stage-t kernels formed by picking one vertex per independent component.
std::vector<StageKernel> enumerate_extreme_kernels(const StageModel& model, const MdpInstance& inst,
                                                   int t, std::int64_t cap = kDefaultEnumCap);

// Vertex pieces of the state-wise marginal at (t, s), in the joint space.
std::vector<Matrix> full_marginal_pieces(const StageModel& model, const MdpInstance& inst, int t,
                                         int s, std::int64_t cap = kDefaultEnumCap);

UnionOfPolytopes marginalize_statewise(const StageModel& model, const MdpInstance& inst, int t,
                                       int s, std::int64_t cap = kDefaultEnumCap);

// The s-rectangular model whose per-state marginal equals the input's
// (the enlargement is a fixed point on s-rectangular input).
SRectModel s_rect_enlargement(const StageModel& model, const MdpInstance& inst, int t,
                              std::int64_t cap = kDefaultEnumCap);

// Blend two parts into an sr-rectangular model; throws ValidationError when
// some extreme blend leaves the simplex.
SrRectModel compose_sr(double beta, SRectModel s_part, RRectModel r_part, const MdpInstance& inst,
                       int t);

// L1 distance from a full stage kernel to the model's kernel set (0 for
// members). Piece/part selections are enumerated; distances solved by LP.
double kernel_membership_distance(const StageModel& model, const MdpInstance& inst, int t,
                                  const StageKernel& kernel, std::int64_t cap = kDefaultEnumCap);

struct ProductProbeReport {
  bool conclusive = false;      // found a product combination outside the set
  bool product_contained = false;  // every checked combination was a member
  std::optional<StageKernel> witness;
  double witness_distance = 0.0;
  std::string note;
};

// Is the set the product of its per-(s,a) marginals? Composes product
// combinations of marginal vertices and tests membership by LP.
ProductProbeReport sa_product_membership_probe(const StageModel& model, const MdpInstance& inst,
                                               int t, std::int64_t cap = kDefaultEnumCap);

// Same across states: is the set the product of its state-wise marginals?
ProductProbeReport s_product_membership_probe(const StageModel& model, const MdpInstance& inst,
                                              int t, std::int64_t cap = kDefaultEnumCap);

AmbiguityModel singleton_ambiguity(const Kernel& kernel);

}  // namespace drmdp

#endif  // DRMDP_AMBIGUITY_HPP
