#include "fwi/reverse.hpp"

#include <stdexcept>

namespace fwi {

void reverse_step(const ScalarField& cot_next, ScalarField& cot_curr, ScalarField& cot_prev,
                  const ScalarField& u_curr, const ScalarField* force, const ScalarField& gamma,
                  const MaterialModel& material, const TimeAxis& time, const NeighborTable& nb,
                  ScalarField& gamma_accum) {
    const Grid& grid = gamma.grid;
    if (cot_next.grid != grid || u_curr.grid != grid || gamma_accum.grid != grid)
        throw std::invalid_argument("reverse_step: field grids must match gamma");

    const std::size_t n = grid.num_nodes();
    const std::size_t rank = grid.rank();
    double cfl2[3];
    for (std::size_t d = 0; d < rank; ++d) {
        const double c = material.c0 * time.dt / grid.spacing[d];
        cfl2[d] = c * c;
    }
    const double src_scale = time.dt * time.dt / material.rho0;

    const double* w = cot_next.values.data();
    const double* uc = u_curr.values.data();
    const double* gm = gamma.values.data();
    const double* f = force ? force->values.data() : nullptr;
    double* cc = cot_curr.values.data();
    double* cp = cot_prev.values.data();
    double* ga = gamma_accum.values.data();

    for (std::size_t i = 0; i < n; ++i) {
        const double wi = w[i];
        if (wi == 0.0) continue;
        const double g = gm[i];
        const double pref = 2.0 / g;

        cp[i] -= wi;          // d u_next / d u_prev = -1
        cc[i] += 2.0 * wi;    // leapfrog term

        for (std::size_t d = 0; d < rank; ++d) {
            const std::size_t iu = nb.up_of(d, i);
            const std::size_t id = nb.dn_of(d, i);
            const double gu = gm[iu];
            const double gd = gm[id];
            const double h_up = 1.0 / (1.0 / g + 1.0 / gu);
            const double h_dn = 1.0 / (1.0 / gd + 1.0 / g);
            const double du = uc[iu] - uc[i];
            const double dd = uc[i] - uc[id];
            const double k = wi * pref * cfl2[d];

            // flux terms: pref*cfl2*(h_up*du - h_dn*dd)
            cc[iu] += k * h_up;
            cc[i] -= k * (h_up + h_dn);
            cc[id] += k * h_dn;

            // d/d gamma of the 1/gamma prefactor
            ga[i] -= wi * (2.0 / (g * g)) * cfl2[d] * (h_up * du - h_dn * dd);
            // d H / d gamma = H^2 / gamma^2 on either side of the face
            ga[i] += k * du * (h_up * h_up) / (g * g);
            ga[iu] += k * du * (h_up * h_up) / (gu * gu);
            ga[i] -= k * dd * (h_dn * h_dn) / (g * g);
            ga[id] -= k * dd * (h_dn * h_dn) / (gd * gd);
        }
        if (f && f[i] != 0.0) ga[i] -= wi * src_scale * f[i] / (g * g);
    }
}

BackpropResult backprop_through_solver(const ScalarField& gamma, const MaterialModel& material,
                                       const TimeAxis& time, const SourceSpec& src,
                                       const SensorArray& sensors, const ShotRecord& data,
                                       bool trapezoid) {
    const Grid& grid = gamma.grid;
    ForwardResult fwd = run_forward(gamma, material, time, src, sensors, true);
    const WavefieldHistory& hist = *fwd.history;

    BackpropResult out;
    out.record = fwd.record;
    out.loss = measurement_loss(fwd.record, data, time, trapezoid);
    out.gradient = ScalarField(grid);

    const ResidualRecord res = residual_record(fwd.record, data);
    const auto sensor_nodes = sensors.flat_nodes(grid);
    const std::size_t n_steps = time.n_steps;
    const NeighborTable nb(grid);
    const SourceTable table = burst_table(grid, time, src);   // force-field values
    const std::size_t src_node = table.nodes[0];

    // d loss / d u^m at the sensor nodes
    auto seed_into = [&](ScalarField& cot, std::size_t m) {
        cot.fill(0.0);
        const double w = loss_time_weight(m, n_steps, trapezoid) * time.dt;
        for (std::size_t s = 0; s < sensor_nodes.size(); ++s)
            cot.values[sensor_nodes[s]] += w * res.at(s, m);
    };

    ScalarField cot_next(grid), cot_curr(grid), cot_prev(grid), force(grid), u_curr(grid);
    seed_into(cot_next, n_steps);
    if (n_steps >= 1) seed_into(cot_curr, n_steps - 1);

    // cot(u^m) = seed(m) + A^T_m cot(u^{m+1}) - cot(u^{m+2}); gamma cotangent
    // accumulated in fixed step-descending order for determinism.
    for (std::size_t m = n_steps; m-- > 1;) {
        seed_into(cot_prev, m - 1);
        std::copy(hist.step(m), hist.step(m) + grid.num_nodes(), u_curr.values.begin());
        force.values[src_node] = table.values[m];
        reverse_step(cot_next, cot_curr, cot_prev, u_curr, &force, gamma, material, time, nb,
                     out.gradient);
        force.values[src_node] = 0.0;

        std::swap(cot_next, cot_curr);   // cot(u^m) is now complete
        std::swap(cot_curr, cot_prev);
    }
    return out;
}

}  // namespace fwi
