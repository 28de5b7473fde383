#ifndef DRMDP_FIXTURES_HPP
#define DRMDP_FIXTURES_HPP

#include <string>
#include <vector>

#include "drmdp/io.hpp"

namespace drmdp {

// Bundled desk-scale instances with known outcomes, used by the CLI's
// `examples` subcommand and by the test suites.
struct Fixture {
  std::string name;
  std::string description;
  InstanceFile file;
};

std::vector<std::string> fixture_names();
Fixture get_fixture(const std::string& name);

// Two-stage three-state instance used throughout: two actions at the single
// initial state, terminal costs (v_high, v_low).
MdpInstance two_action_instance(double v_high, double v_low);

// The coupled-segment set {P(. | a_left) = (p, 1-p), P(. | a_right) =
// ((1+p)/3, (2-p)/3), p in [0,1]} in its factor representation.
RRectModel coupled_segment_r_rect();

// s-rectangular single state set with P(top|left) = p, P(top|right) = 1 - p,
// p ranging over the given closed intervals (one polytope piece each).
SRectModel mirrored_segment_s_rect(const std::vector<std::pair<double, double>>& intervals);

struct GoldenCheck {
  std::string label;
  bool pass = false;
  std::string detail;
};

struct GoldenReport {
  std::string name;
  bool pass = false;
  std::vector<GoldenCheck> checks;
};

GoldenReport run_fixture_goldens(const std::string& name);

}  // namespace drmdp

#endif  // DRMDP_FIXTURES_HPP
