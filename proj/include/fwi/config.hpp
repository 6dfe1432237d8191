#ifndef FWI_CONFIG_HPP
#define FWI_CONFIG_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fwi/field.hpp"
#include "fwi/network.hpp"
#include "fwi/optimize.hpp"
#include "fwi/phantom.hpp"
#include "fwi/wave.hpp"

namespace fwi {

/// Raised on any configuration problem; the message names the offending
/// section and key.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A fully validated case: grid, material, time axis, acquisition geometry,
/// phantom, and training settings. Unknown keys are rejected.
struct CaseConfig {
    Grid grid;
    MaterialModel material;
    TimeAxis time;
    std::vector<SourceSpec> sources;
    SensorArray sensors;
    std::vector<VoidShape> voids;
    TrainConfig train;
    std::optional<GeneratorConfig> network;
    std::string output_dir = "out";

    ScalarField truth() const;   // phantom on the case grid
};

CaseConfig parse_case_config(std::istream& is);
CaseConfig load_case_config(const std::string& path);

}  // namespace fwi

#endif
