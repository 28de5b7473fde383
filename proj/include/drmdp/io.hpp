#ifndef DRMDP_IO_HPP
#define DRMDP_IO_HPP

#include <optional>
#include <string>

#include "drmdp/ambiguity.hpp"
#include "drmdp/cost_robust.hpp"
#include "drmdp/mdp.hpp"
#include "drmdp/risk_soc.hpp"
#include "drmdp/static_oracle.hpp"

namespace drmdp {

// Instance files are strict-schema JSON: unknown keys are rejected, ordered
// collections are arrays, and name-keyed maps are resolved against the
// declared state/action arrays. parse(serialize(x)) reproduces x field by
// field.
struct InstanceFile {
  MdpInstance mdp;
  std::optional<Kernel> kernel;  // fixed kernel (nominal / cost-robust runs)
  std::optional<AmbiguityModel> ambiguity;
  std::optional<CostAmbiguityModel> cost_ambiguity;
  std::optional<AvarSpec> avar;
  std::optional<SocSpec> soc;
  std::optional<OracleConfig> oracle;
};

InstanceFile parse_instance_text(const std::string& json_text);
InstanceFile load_instance_file(const std::string& path);
std::string serialize_instance_file(const InstanceFile& file);

bool instance_files_equal(const InstanceFile& a, const InstanceFile& b);

}  // namespace drmdp

#endif  // DRMDP_IO_HPP
