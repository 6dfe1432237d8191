#ifndef FWI_PINN_HPP
#define FWI_PINN_HPP

#include <optional>
#include <vector>

#include "fwi/field.hpp"
#include "fwi/invert.hpp"
#include "fwi/network.hpp"
#include "fwi/optimize.hpp"
#include "fwi/wave.hpp"

namespace fwi {

/// Full-domain-knowledge inversion input: the wavefield is known at every
/// node and step for each source.
struct FullDomainProblem {
    Grid grid;
    MaterialModel material;
    TimeAxis time;
    std::vector<SourceSpec> sources;
    std::vector<WavefieldHistory> wavefields;
    std::optional<ScalarField> truth;

    void validate() const;
};

/// Discrete residual of the stored wavefield under the candidate indicator,
/// evaluated with the solver's stencil at one strictly-interior node and time
/// step (forcing included). Expressed in u units: the stored u at step+1
/// minus the stencil prediction, which is the PDE residual scaled by
/// dt^2/(gamma rho0).
double pde_residual_at(const WavefieldHistory& u, const ScalarField& gamma,
                       const MaterialModel& material, std::size_t node, std::size_t step,
                       double force_value);

struct PinnResult {
    GeneratorNetwork network;
    ScalarField lambda;        // self-adaptive weights, one per node
    TrainingHistory history;
    bool diverged = false;
};

/// Minimax collocation inversion: the loss is the lambda-weighted mean of
/// squared PDE residuals over all strictly-interior space-time points, with
/// the indicator produced by the generator and its boundary ring pinned to 1.
/// theta descends with Adam at the scheduled lr, lambda ascends with plain
/// gradient steps of size lr_max. cost_norm in the history is relative to the
/// gamma == 1, lambda == 1 loss.
PinnResult full_domain_pinn_invert(const FullDomainProblem& problem, const TrainConfig& cfg,
                                   const GeneratorConfig& net_cfg);

}  // namespace fwi

#endif
