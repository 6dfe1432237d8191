#include "fwi/adjoint.hpp"

#include <algorithm>
#include <stdexcept>

namespace fwi {

namespace {

void check_shapes(const ShotRecord& a, const ShotRecord& b) {
    if (a.sensors.positions != b.sensors.positions)
        throw std::invalid_argument("records: sensor arrays must match");
    if (a.time.n_steps != b.time.n_steps || a.time.dt != b.time.dt)
        throw std::invalid_argument("records: time axes must match");
}

}  // namespace

double loss_time_weight(std::size_t n, std::size_t n_steps, bool trapezoid) {
    if (trapezoid) return (n == 0 || n == n_steps) ? 0.5 : 1.0;
    return n < n_steps ? 1.0 : 0.0;
}

double measurement_loss(const ShotRecord& prediction, const ShotRecord& data,
                        const TimeAxis& time, bool trapezoid) {
    check_shapes(prediction, data);
    if (prediction.time.n_steps != time.n_steps)
        throw std::invalid_argument("records: time axis does not match the loss axis");
    double acc = 0.0;
    const std::size_t n_samples = time.n_steps + 1;
    for (std::size_t s = 0; s < prediction.sensors.count(); ++s)
        for (std::size_t n = 0; n < n_samples; ++n) {
            const double r = prediction.at(s, n) - data.at(s, n);
            acc += loss_time_weight(n, time.n_steps, trapezoid) * r * r;
        }
    return 0.5 * acc * time.dt;
}

ResidualRecord residual_record(const ShotRecord& prediction, const ShotRecord& data) {
    check_shapes(prediction, data);
    ResidualRecord r = prediction;
    for (std::size_t i = 0; i < r.samples.size(); ++i) r.samples[i] -= data.samples[i];
    return r;
}

AdjointHistory run_adjoint(const ScalarField& gamma, const MaterialModel& material,
                           const TimeAxis& time, const ResidualRecord& residual,
                           bool trapezoid) {
    if (residual.time.n_steps != time.n_steps)
        throw std::invalid_argument("adjoint: residual time axis mismatch");
    const Grid& grid = gamma.grid;
    residual.sensors.validate(grid);

    const std::size_t n_steps = time.n_steps;
    const std::size_t n_sensors = residual.sensors.count();

    // Adjoint source: -residual, time reversed, weighted like the loss
    // quadrature. The Dirac scale of a delta at a sensor node is the nodal
    // quadrature volume (half cells on boundary faces), which keeps the
    // kernel gradient consistent with the discrete misfit.
    //
    // The run is extended by one step: matching the transposed sweep of the
    // leapfrog exactly gives u+(t_m) = v^{N+1-m}, where v is the forward
    // response to the reversed source.
    const TimeAxis extended{time.dt, n_steps + 1};
    const std::size_t n_ext = extended.n_steps + 1;   // samples in the extended run

    SourceTable table;
    table.nodes = residual.sensors.flat_nodes(grid);
    table.values.assign(n_sensors * n_ext, 0.0);
    for (std::size_t s = 0; s < n_sensors; ++s) {
        const double vol = grid.node_volume(table.nodes[s]);
        for (std::size_t m = 0; m <= n_steps; ++m) {
            const std::size_t n = n_steps - m;
            table.values[s * n_ext + m] =
                -loss_time_weight(n, n_steps, trapezoid) * residual.at(s, n) / vol;
        }
    }

    SensorArray no_sensors;
    ForwardResult fwd = run_forward_table(gamma, material, extended, table, no_sensors, true);

    AdjointHistory adj(grid, time);
    const std::size_t n = grid.num_nodes();
    for (std::size_t m = 0; m <= n_steps; ++m) {
        const double* src = fwd.history->step(n_steps + 1 - m);
        std::copy(src, src + n, adj.step(m));
    }
    return adj;
}

ScalarField frechet_kernel(const WavefieldHistory& forward, const AdjointHistory& adjoint,
                           const MaterialModel& material) {
    if (forward.grid != adjoint.grid)
        throw std::invalid_argument("kernel: forward and adjoint grids must match");
    if (forward.time.n_steps != adjoint.time.n_steps || forward.time.dt != adjoint.time.dt)
        throw std::invalid_argument("kernel: forward and adjoint time axes must match");

    const Grid& grid = forward.grid;
    const std::size_t n = grid.num_nodes();
    const std::size_t rank = grid.rank();
    const std::size_t n_steps = forward.time.n_steps;
    const double dt = forward.time.dt;
    const auto str = grid.strides();
    const double rc2 = material.rho0 * material.c0 * material.c0;

    ScalarField kernel(grid);

    // one-sided spatial differences at boundary nodes, central elsewhere
    auto grad_axis = [&](const double* u, std::size_t i, std::size_t d) {
        const std::size_t nd = grid.dims[d];
        const std::size_t sd = str[d];
        const std::size_t coord = (i / sd) % nd;
        const double h = grid.spacing[d];
        if (coord == 0) return (u[i + sd] - u[i]) / h;
        if (coord == nd - 1) return (u[i] - u[i - sd]) / h;
        return (u[i + sd] - u[i - sd]) / (2.0 * h);
    };

    // Left Riemann sum. The adjoint factors are sampled one step ahead of the
    // forward factors, matching the pairing of the transposed time stepping;
    // both derivatives stay centered at their own sample.
    for (std::size_t step = 0; step < n_steps; ++step) {
        const std::size_t astep = step + 1;
        const double* u = forward.step(step);
        const double* a = adjoint.step(astep);

        const double* u_next = forward.step(std::min(step + 1, n_steps));
        const double* u_prev = forward.step(step == 0 ? 0 : step - 1);
        const double* a_next = adjoint.step(std::min(astep + 1, n_steps));
        const double* a_prev = adjoint.step(astep - 1);
        const double dt_span_u = (step == 0 || step == n_steps) ? dt : 2.0 * dt;
        const double dt_span_a = (astep == n_steps) ? dt : 2.0 * dt;

        for (std::size_t i = 0; i < n; ++i) {
            const double ut = (u_next[i] - u_prev[i]) / dt_span_u;
            const double at = (a_next[i] - a_prev[i]) / dt_span_a;
            double grad_dot = 0.0;
            for (std::size_t d = 0; d < rank; ++d)
                grad_dot += grad_axis(u, i, d) * grad_axis(a, i, d);
            kernel.values[i] += (-material.rho0 * ut * at + rc2 * grad_dot) * dt;
        }
    }
    return kernel;
}

std::vector<double> gradient_wrt_coeffs(const ScalarField& kernel, const ConstantAnsatz& ansatz) {
    return chain_to_coeffs(kernel, ansatz);
}

ScalarField nodal_gradient_from_kernel(const ScalarField& kernel) {
    ScalarField out = kernel;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= kernel.grid.node_volume(i);
    return out;
}

}  // namespace fwi
