#include "fwi/pinn.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fwi {

void FullDomainProblem::validate() const {
    material.validate();
    time.validate();
    if (sources.empty()) throw std::invalid_argument("problem: at least one source required");
    for (const auto& s : sources) s.validate(grid);
    if (wavefields.size() != sources.size())
        throw std::invalid_argument("problem: one wavefield per source required");
    for (const auto& w : wavefields) {
        if (w.grid != grid) throw std::invalid_argument("problem: wavefield grid mismatch");
        if (w.time.n_steps != time.n_steps)
            throw std::invalid_argument("problem: wavefield time axis mismatch");
    }
    if (truth && truth->grid != grid)
        throw std::invalid_argument("problem: truth grid mismatch");
}

namespace {

struct ResidualWorkspace {
    const Grid& grid;
    const MaterialModel& material;
    double dt;
    std::vector<std::size_t> str;
    double src_scale;    // dt^2 / rho0
    double cfl2[3];      // (c0 dt / h_d)^2

    ResidualWorkspace(const Grid& g, const MaterialModel& m, double dt_)
        : grid(g), material(m), dt(dt_), str(g.strides()) {
        src_scale = dt * dt / m.rho0;
        for (std::size_t d = 0; d < g.rank(); ++d) {
            const double c = m.c0 * dt / g.spacing[d];
            cfl2[d] = c * c;
        }
    }
};

inline double harmonic(double a, double b) { return 1.0 / (1.0 / a + 1.0 / b); }

// residual of the update equation in u units, i.e. u_next minus the stencil
// prediction (the PDE residual scaled by dt^2/(gamma rho0)); optionally its
// derivatives w.r.t. gamma at the node and its axis neighbors. Strictly
// interior nodes only, so no mirrored fetches.
double residual_core(const ResidualWorkspace& ws, const WavefieldHistory& u,
                     const ScalarField& gamma, std::size_t i, std::size_t step, double force,
                     double* d_self, double* d_up, double* d_dn) {
    const double* uc = u.step(step);
    const double* un = u.step(step + 1);
    const double* up = u.step(step - 1);
    const double g = gamma.values[i];
    const double pref = 2.0 / g;

    double res = un[i] - 2.0 * uc[i] + up[i] - ws.src_scale * force / g;
    if (d_self) *d_self = ws.src_scale * force / (g * g);

    for (std::size_t d = 0; d < ws.grid.rank(); ++d) {
        const std::size_t sd = ws.str[d];
        const double gu = gamma.values[i + sd];
        const double gd = gamma.values[i - sd];
        const double h_up = harmonic(g, gu);
        const double h_dn = harmonic(gd, g);
        const double du = uc[i + sd] - uc[i];
        const double dd = uc[i] - uc[i - sd];
        const double flux = h_up * du - h_dn * dd;
        res -= pref * ws.cfl2[d] * flux;
        if (d_self) {
            *d_self += (2.0 / (g * g)) * ws.cfl2[d] * flux;
            *d_self -= pref * ws.cfl2[d] *
                       (du * (h_up * h_up) / (g * g) - dd * (h_dn * h_dn) / (g * g));
            d_up[d] = -pref * ws.cfl2[d] * du * (h_up * h_up) / (gu * gu);
            d_dn[d] = pref * ws.cfl2[d] * dd * (h_dn * h_dn) / (gd * gd);
        }
    }
    return res;
}

bool on_ring(const Grid& g, const std::vector<std::size_t>& str, std::size_t node) {
    for (std::size_t d = 0; d < g.rank(); ++d) {
        const std::size_t c = (node / str[d]) % g.dims[d];
        if (c == 0 || c == g.dims[d] - 1) return true;
    }
    return false;
}

}  // namespace

double pde_residual_at(const WavefieldHistory& u, const ScalarField& gamma,
                       const MaterialModel& material, std::size_t node, std::size_t step,
                       double force_value) {
    if (step == 0 || step >= u.time.n_steps)
        throw std::invalid_argument("residual: step must have both time neighbors");
    const auto str = u.grid.strides();
    if (on_ring(u.grid, str, node))
        throw std::invalid_argument("residual: node must be strictly interior");
    ResidualWorkspace ws(u.grid, material, u.time.dt);
    return residual_core(ws, u, gamma, node, step, force_value, nullptr, nullptr, nullptr);
}

PinnResult full_domain_pinn_invert(const FullDomainProblem& problem, const TrainConfig& cfg,
                                   const GeneratorConfig& net_cfg) {
    problem.validate();
    cfg.validate();
    if (net_cfg.output_dims != problem.grid.dims)
        throw std::invalid_argument("invert: generator output does not match the grid");

    const Grid& grid = problem.grid;
    const auto str = grid.strides();
    const std::size_t n_nodes = grid.num_nodes();
    const std::size_t n_sources = problem.sources.size();
    const std::size_t n_res_steps = problem.time.n_steps - 1;   // steps 1..n_steps-1

    std::vector<std::size_t> interior;
    interior.reserve(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i)
        if (!on_ring(grid, str, i)) interior.push_back(i);
    const double n_pts = static_cast<double>(interior.size() * n_res_steps);

    // per-source force tables at the source node
    std::vector<SourceTable> tables;
    for (const auto& s : problem.sources)
        tables.push_back(burst_table(grid, problem.time, s));

    ResidualWorkspace ws(grid, problem.material, problem.time.dt);

    // weighted residual loss, gamma gradient, and lambda gradient in one sweep
    auto evaluate = [&](const ScalarField& gamma, const ScalarField& lambda,
                        ScalarField* gamma_grad, ScalarField* lambda_grad) {
        double loss = 0.0;
        if (gamma_grad) gamma_grad->fill(0.0);
        if (lambda_grad) lambda_grad->fill(0.0);
        for (std::size_t s = 0; s < n_sources; ++s) {
            const WavefieldHistory& u = problem.wavefields[s];
            const std::size_t src_node = tables[s].nodes[0];
            for (std::size_t step = 1; step <= n_res_steps; ++step) {
                const double fval = tables[s].values[step];
                for (const std::size_t i : interior) {
                    const double force = i == src_node ? fval : 0.0;
                    double d_self = 0.0, d_up[3], d_dn[3];
                    const double r = residual_core(ws, u, gamma, i, step, force,
                                                   gamma_grad ? &d_self : nullptr, d_up, d_dn);
                    loss += 0.5 * lambda.values[i] * r * r;
                    if (lambda_grad) lambda_grad->values[i] += 0.5 * r * r;
                    if (gamma_grad) {
                        const double w = lambda.values[i] * r;
                        gamma_grad->values[i] += w * d_self;
                        for (std::size_t d = 0; d < grid.rank(); ++d) {
                            gamma_grad->values[i + str[d]] += w * d_up[d];
                            gamma_grad->values[i - str[d]] += w * d_dn[d];
                        }
                    }
                }
            }
        }
        const double scale = 1.0 / (n_pts * static_cast<double>(n_sources));
        loss *= scale;
        if (gamma_grad)
            for (double& v : gamma_grad->values) v *= scale;
        if (lambda_grad)
            for (double& v : lambda_grad->values) v *= scale;
        return loss;
    };

    auto pin_boundary = [&](ScalarField& gamma) {
        for (std::size_t i = 0; i < n_nodes; ++i)
            if (on_ring(grid, str, i)) gamma.values[i] = 1.0;
    };

    PinnResult result{GeneratorNetwork::glorot_init(net_cfg, cfg.seed, cfg.seed + 1),
                      ScalarField(grid, 1.0),
                      {},
                      false};

    // normalization references at gamma == 1, lambda == 1; training runs on
    // the normalized cost so that gradient magnitudes are O(1) regardless of
    // the wavefield amplitude scale
    const ScalarField ones(grid, 1.0);
    const double cost_ref0 = evaluate(ones, ones, nullptr, nullptr);
    const double cost_ref = cost_ref0 > 0.0 ? cost_ref0 : 1.0;
    const double mse_ref0 = problem.truth ? field_mse(ones, *problem.truth) : 0.0;
    const double mse_ref = mse_ref0 > 0.0 ? mse_ref0 : 1.0;

    AdamState adam(result.network.parameter_count());
    ScalarField gamma_grad(grid), lambda_grad(grid);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();

        GeneratorNetwork::Cache cache;
        ScalarField gamma = result.network.forward(grid, &cache);
        pin_boundary(gamma);

        const double loss = evaluate(gamma, result.lambda, &gamma_grad, &lambda_grad);
        if (!std::isfinite(loss)) {
            result.diverged = true;
            break;
        }

        // pinned boundary nodes do not flow back into the network
        for (std::size_t i = 0; i < n_nodes; ++i)
            gamma_grad.values[i] = on_ring(grid, str, i) ? 0.0 : gamma_grad.values[i] / cost_ref;

        std::vector<double> theta_grad = result.network.backward(cache, gamma_grad);
        const double grad_norm = l2_norm(theta_grad);
        clip_gradient(theta_grad, cfg.clip_threshold);
        const double lr = lr_schedule(epoch, cfg);
        adam_step(adam, result.network.parameters(), theta_grad, lr);

        // plain ascent on the penalty weights; residuals keep them
        // nonnegative. The gradient is normalized by its interior mean so a
        // typical point gains lr_max per epoch and high-residual points grow
        // proportionally faster.
        double mean_lgrad = 0.0;
        for (const std::size_t i : interior) mean_lgrad += lambda_grad.values[i];
        mean_lgrad /= static_cast<double>(interior.size());
        if (mean_lgrad > 0.0)
            for (const std::size_t i : interior)
                result.lambda.values[i] += cfg.lr_max * lambda_grad.values[i] / mean_lgrad;

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

}  // namespace fwi
