#ifndef FWI_INVERT_HPP
#define FWI_INVERT_HPP

#include <optional>
#include <string>
#include <vector>

#include "fwi/adjoint.hpp"
#include "fwi/ansatz.hpp"
#include "fwi/field.hpp"
#include "fwi/network.hpp"
#include "fwi/optimize.hpp"
#include "fwi/wave.hpp"

namespace fwi {

/// One measured inverse problem: sources, sensors, and one recorded shot per
/// source. `truth` is optional and only feeds the error metric of the
/// training history.
struct InverseProblem {
    Grid grid;
    MaterialModel material;
    TimeAxis time;
    std::vector<SourceSpec> sources;
    SensorArray sensors;
    std::vector<ShotRecord> data;
    std::optional<ScalarField> truth;

    void validate() const;
};

struct EpochStats {
    double cost_norm;     // measurement loss / loss at gamma == 1
    double mse_norm;      // gamma mse vs truth / mse of gamma == 1 (nan without truth)
    double lr;
    double grad_norm;     // source-averaged gradient norm before clipping
    double wall_seconds;  // not serialized
};

struct TrainingHistory {
    std::vector<EpochStats> epochs;

    /// Text table. Wall time is excluded so identical seeds produce
    /// byte-identical files.
    std::string serialize() const;
};

/// Trained parameters of either Ansatz.
struct AnsatzParams {
    std::optional<ConstantAnsatz> constant;
    std::optional<GeneratorNetwork> network;

    ScalarField eval(const Grid& grid) const;
};

struct InvertResult {
    AnsatzParams params;
    TrainingHistory history;
    bool diverged = false;
};

/// Gradient-based inversion with the strategy chosen in cfg:
/// adjoint-constant (Frechet kernel onto voxel coefficients), backprop-nn
/// (reverse solver through the generator), or hybrid (kernel upstream into
/// the generator backward pass). Gradients are averaged over sources in fixed
/// order, clipped by global norm, and fed to Adam with the polynomial decay
/// schedule. net_cfg is required for the network strategies.
InvertResult invert(const InverseProblem& problem, const TrainConfig& cfg,
                    const GeneratorConfig* net_cfg);

struct SharpnessResult {
    ScalarField norm;          // nodal |grad gamma|
    double mean_above = 0.0;   // mean of norms above the threshold, 0 if none
    bool any_above = false;
};

/// Spatial gradient norm by central differences (one-sided at boundaries) and
/// the mean of values exceeding the threshold.
SharpnessResult sharpness_metric(const ScalarField& field, double threshold);

}  // namespace fwi

#endif
