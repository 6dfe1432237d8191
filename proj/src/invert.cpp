#include "fwi/invert.hpp"

#include <chrono>
#include <limits>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "fwi/reverse.hpp"

namespace fwi {

void InverseProblem::validate() const {
    material.validate();
    time.validate();
    if (sources.empty()) throw std::invalid_argument("problem: at least one source required");
    for (const auto& s : sources) s.validate(grid);
    sensors.validate(grid);
    if (data.size() != sources.size())
        throw std::invalid_argument("problem: one data record per source required");
    for (const auto& d : data) {
        if (d.time.n_steps != time.n_steps)
            throw std::invalid_argument("problem: data time axis mismatch");
        if (d.sensors.positions != sensors.positions)
            throw std::invalid_argument("problem: data sensor array mismatch");
    }
    if (truth && truth->grid != grid)
        throw std::invalid_argument("problem: truth grid mismatch");
}

std::string TrainingHistory::serialize() const {
    std::string out = "epoch,cost_norm,mse_norm,lr,grad_norm\n";
    char buf[160];
    for (std::size_t e = 0; e < epochs.size(); ++e) {
        const EpochStats& s = epochs[e];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", e, s.cost_norm,
                      s.mse_norm, s.lr, s.grad_norm);
        out += buf;
    }
    return out;
}

ScalarField AnsatzParams::eval(const Grid& grid) const {
    if (constant) {
        if (constant->grid != grid) throw std::invalid_argument("ansatz: grid mismatch");
        return eval_constant(*constant);
    }
    if (network) return network->forward(grid, nullptr);
    throw std::invalid_argument("ansatz: empty parameter set");
}

namespace {

double mean_loss_at(const ScalarField& gamma, const InverseProblem& p, bool trapezoid) {
    double acc = 0.0;
    for (std::size_t s = 0; s < p.sources.size(); ++s) {
        const auto fwd = run_forward(gamma, p.material, p.time, p.sources[s], p.sensors, false);
        acc += measurement_loss(fwd.record, p.data[s], p.time, trapezoid);
    }
    return acc / static_cast<double>(p.sources.size());
}

}  // namespace

InvertResult invert(const InverseProblem& problem, const TrainConfig& cfg,
                    const GeneratorConfig* net_cfg) {
    problem.validate();
    cfg.validate();
    if (cfg.strategy == Strategy::FullDomainPinn)
        throw std::invalid_argument("invert: full-domain-pinn uses full_domain_pinn_invert");
    const bool uses_network = cfg.strategy != Strategy::AdjointConstant;
    if (uses_network && !net_cfg)
        throw std::invalid_argument("invert: network strategies require a generator config");
    if (uses_network && net_cfg->output_dims != problem.grid.dims)
        throw std::invalid_argument("invert: generator output does not match the grid");

    const Grid& grid = problem.grid;
    const double n_sources = static_cast<double>(problem.sources.size());

    InvertResult result;
    if (uses_network)
        result.params.network = GeneratorNetwork::glorot_init(*net_cfg, cfg.seed, cfg.seed + 1);
    else
        result.params.constant = ConstantAnsatz::uniform(grid, 1.0, problem.material.eps,
                                                         problem.material.upper, cfg.voxel_nodes);

    // normalization constants: the same problem evaluated at gamma == 1;
    // degenerate references (data consistent with the plate) fall back to
    // absolute values
    const ScalarField ones(grid, 1.0);
    const double cost_ref0 = mean_loss_at(ones, problem, cfg.trapezoid_loss);
    const double cost_ref = cost_ref0 > 0.0 ? cost_ref0 : 1.0;
    const double mse_ref0 = problem.truth ? field_mse(ones, *problem.truth) : 0.0;
    const double mse_ref = mse_ref0 > 0.0 ? mse_ref0 : 1.0;

    std::vector<double>* flat_params = nullptr;
    if (uses_network)
        flat_params = &result.params.network->parameters();
    else
        flat_params = &result.params.constant->coeffs;
    AdamState adam(flat_params->size());

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        GeneratorNetwork::Cache cache;
        const ScalarField gamma = uses_network
                                      ? result.params.network->forward(grid, &cache)
                                      : eval_constant(*result.params.constant);

        double loss = 0.0;
        std::vector<double> grad(flat_params->size(), 0.0);
        ScalarField upstream(grid);   // network strategies: source-averaged nodal gradient

        for (std::size_t s = 0; s < problem.sources.size(); ++s) {
            if (cfg.strategy == Strategy::BackpropNN) {
                const auto bp = backprop_through_solver(gamma, problem.material, problem.time,
                                                        problem.sources[s], problem.sensors,
                                                        problem.data[s], cfg.trapezoid_loss);
                loss += bp.loss;
                for (std::size_t i = 0; i < upstream.size(); ++i)
                    upstream.values[i] += bp.gradient.values[i];
            } else {
                const auto fwd = run_forward(gamma, problem.material, problem.time,
                                             problem.sources[s], problem.sensors, true);
                loss += measurement_loss(fwd.record, problem.data[s], problem.time,
                                         cfg.trapezoid_loss);
                const auto res = residual_record(fwd.record, problem.data[s]);
                const auto adj = run_adjoint(gamma, problem.material, problem.time, res,
                                             cfg.trapezoid_loss);
                const auto kernel = frechet_kernel(*fwd.history, adj, problem.material);
                if (cfg.strategy == Strategy::AdjointConstant) {
                    const auto gc = gradient_wrt_coeffs(kernel, *result.params.constant);
                    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += gc[i];
                } else {
                    const auto nodal = nodal_gradient_from_kernel(kernel);
                    for (std::size_t i = 0; i < upstream.size(); ++i)
                        upstream.values[i] += nodal.values[i];
                }
            }
        }
        loss /= n_sources;

        if (!std::isfinite(loss)) {
            result.diverged = true;
            break;
        }

        if (uses_network) {
            for (double& v : upstream.values) v /= n_sources;
            grad = result.params.network->backward(cache, upstream);
        } else {
            for (double& v : grad) v /= n_sources;
        }

        const double grad_norm = l2_norm(grad);
        clip_gradient(grad, cfg.clip_threshold);
        const double lr = lr_schedule(epoch, cfg);
        adam_step(adam, *flat_params, grad, lr);
        if (!uses_network)
            for (double& c : result.params.constant->coeffs)
                c = clip_indicator(c, problem.material.eps, problem.material.upper);

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.history.epochs.push_back(
            {loss / cost_ref,
             problem.truth ? field_mse(gamma, *problem.truth) / mse_ref
                           : std::numeric_limits<double>::quiet_NaN(),
             lr, grad_norm, wall});
    }
    return result;
}

SharpnessResult sharpness_metric(const ScalarField& field, double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("sharpness: threshold must be > 0");
    const Grid& grid = field.grid;
    const auto str = grid.strides();

    SharpnessResult out;
    out.norm = ScalarField(grid);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < field.size(); ++i) {
        double g2 = 0.0;
        for (std::size_t d = 0; d < grid.rank(); ++d) {
            const std::size_t nd = grid.dims[d];
            const std::size_t sd = str[d];
            const std::size_t c = (i / sd) % nd;
            const double h = grid.spacing[d];
            double der;
            if (c == 0)
                der = (field.values[i + sd] - field.values[i]) / h;
            else if (c == nd - 1)
                der = (field.values[i] - field.values[i - sd]) / h;
            else
                der = (field.values[i + sd] - field.values[i - sd]) / (2.0 * h);
            g2 += der * der;
        }
        const double n = std::sqrt(g2);
        out.norm.values[i] = n;
        if (n > threshold) {
            sum += n;
            count += 1;
        }
    }
    out.any_above = count > 0;
    out.mean_above = count > 0 ? sum / static_cast<double>(count) : 0.0;
    return out;
}

}  // namespace fwi
