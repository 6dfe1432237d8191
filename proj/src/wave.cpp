#include "fwi/wave.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace fwi {

namespace {

bool on_grid(const Grid& grid, const std::vector<std::size_t>& pos) {
    if (pos.size() != grid.rank()) return false;
    for (std::size_t d = 0; d < pos.size(); ++d)
        if (pos[d] >= grid.dims[d]) return false;
    return true;
}

bool strictly_interior(const Grid& grid, const std::vector<std::size_t>& pos) {
    for (std::size_t d = 0; d < pos.size(); ++d)
        if (pos[d] == 0 || pos[d] == grid.dims[d] - 1) return false;
    return true;
}

void check_cfl(const Grid& grid, const MaterialModel& material, const TimeAxis& time) {
    time.validate();
    material.validate();
    const double c = courant_number(grid, material.c0, time.dt);
    if (!(c < 1.0))
        throw std::invalid_argument("time: Courant number " + std::to_string(c) +
                                    " violates the stability bound (< 1)");
}

void check_gamma(const ScalarField& gamma, const MaterialModel& material) {
    for (double g : gamma.values)
        if (!(g > 0.0) || g < material.eps * (1.0 - 1e-12))
            throw std::invalid_argument("gamma: values must be >= eps > 0");
}

}  // namespace

void SourceSpec::validate(const Grid& grid) const {
    if (!on_grid(grid, position) || !strictly_interior(grid, position))
        throw std::invalid_argument("source: position must be an interior grid node");
    if (!(frequency > 0.0)) throw std::invalid_argument("source: frequency must be > 0");
    if (cycles < 1) throw std::invalid_argument("source: cycles must be >= 1");
}

double sine_burst(double t, const SourceSpec& src) {
    const double omega = 2.0 * std::numbers::pi * src.frequency;
    const double t_end = 2.0 * std::numbers::pi * src.cycles / omega;
    if (t < 0.0 || t >= t_end) return 0.0;
    return src.amplitude * std::sin(omega * t) * std::sin(omega * t / (2.0 * src.cycles));
}

void inject_source(ScalarField& force, const SourceSpec& src, double t) {
    src.validate(force.grid);
    force.values[force.grid.flat(src.position)] +=
        sine_burst(t, src) / force.grid.squared_spacing_norm();
}

void SensorArray::validate(const Grid& grid) const {
    std::set<std::size_t> seen;
    for (const auto& p : positions) {
        if (!on_grid(grid, p))
            throw std::invalid_argument("sensors: position outside the grid");
        if (!seen.insert(grid.flat(p)).second)
            throw std::invalid_argument("sensors: positions must be distinct");
    }
}

std::vector<std::size_t> SensorArray::flat_nodes(const Grid& grid) const {
    std::vector<std::size_t> out;
    out.reserve(positions.size());
    for (const auto& p : positions) out.push_back(grid.flat(p));
    return out;
}

namespace detail {

// Unchecked update kernel shared by the public step and the time loops.
void step_kernel(const ScalarField& u_prev, const ScalarField& u_curr, const ScalarField& gamma,
                 const ScalarField* force, const MaterialModel& material, const TimeAxis& time,
                 const NeighborTable& nb, ScalarField& u_next) {
    const Grid& grid = gamma.grid;
    const std::size_t n = grid.num_nodes();
    const std::size_t rank = grid.rank();
    double cfl2[3];
    for (std::size_t d = 0; d < rank; ++d) {
        const double c = material.c0 * time.dt / grid.spacing[d];
        cfl2[d] = c * c;
    }
    const double src_scale = time.dt * time.dt / material.rho0;

    const double* up = u_prev.values.data();
    const double* uc = u_curr.values.data();
    const double* gm = gamma.values.data();
    const double* f = force ? force->values.data() : nullptr;
    double* un = u_next.values.data();

    for (std::size_t i = 0; i < n; ++i) {
        const double g = gm[i];
        double acc = 2.0 * uc[i] - up[i];
        const double pref = 2.0 / g;
        for (std::size_t d = 0; d < rank; ++d) {
            const std::size_t iu = nb.up_of(d, i);
            const std::size_t id = nb.dn_of(d, i);
            const double h_up = 1.0 / (1.0 / g + 1.0 / gm[iu]);
            const double h_dn = 1.0 / (1.0 / gm[id] + 1.0 / g);
            acc += pref * cfl2[d] * (h_up * (uc[iu] - uc[i]) - h_dn * (uc[i] - uc[id]));
        }
        if (f) acc += src_scale / g * f[i];
        un[i] = acc;
    }
}

}  // namespace detail

void step_wavefield(const ScalarField& u_prev, const ScalarField& u_curr,
                    const ScalarField& gamma, const ScalarField* force,
                    const MaterialModel& material, const TimeAxis& time,
                    const NeighborTable& nb, ScalarField& u_next) {
    const Grid& grid = gamma.grid;
    if (u_prev.grid != grid || u_curr.grid != grid || u_next.grid != grid)
        throw std::invalid_argument("step: field grids must match gamma");
    check_cfl(grid, material, time);
    check_gamma(gamma, material);
    detail::step_kernel(u_prev, u_curr, gamma, force, material, time, nb, u_next);
}

ForwardResult run_forward_table(const ScalarField& gamma, const MaterialModel& material,
                                const TimeAxis& time, const SourceTable& table,
                                const SensorArray& sensors, bool store_history) {
    const Grid& grid = gamma.grid;
    check_cfl(grid, material, time);
    check_gamma(gamma, material);
    sensors.validate(grid);

    const std::size_t n_samples = time.n_steps + 1;
    const auto sensor_nodes = sensors.flat_nodes(grid);

    ForwardResult out;
    out.record = ShotRecord(sensors, time);
    if (store_history) out.history.emplace(grid, time);

    ScalarField u_prev(grid), u_curr(grid), u_next(grid), force(grid);
    const NeighborTable nb(grid);

    // snapshots 0 and 1 are zero fields; updates run for n = 1..n_steps-1
    for (std::size_t step = 1; step < time.n_steps; ++step) {
        for (std::size_t s = 0; s < table.nodes.size(); ++s)
            force.values[table.nodes[s]] = table.value(s, step, n_samples);

        detail::step_kernel(u_prev, u_curr, gamma, &force, material, time, nb, u_next);

        for (std::size_t s = 0; s < table.nodes.size(); ++s)
            force.values[table.nodes[s]] = 0.0;

        std::swap(u_prev, u_curr);
        std::swap(u_curr, u_next);

        if (out.history)
            std::copy(u_curr.values.begin(), u_curr.values.end(), out.history->step(step + 1));
        for (std::size_t s = 0; s < sensor_nodes.size(); ++s)
            out.record.at(s, step + 1) = u_curr.values[sensor_nodes[s]];
    }
    return out;
}

SourceTable burst_table(const Grid& grid, const TimeAxis& time, const SourceSpec& src) {
    src.validate(grid);
    const double dirac = grid.squared_spacing_norm();
    SourceTable table;
    table.nodes = {grid.flat(src.position)};
    table.values.resize(time.n_steps + 1);
    for (std::size_t n = 0; n <= time.n_steps; ++n)
        table.values[n] = sine_burst(static_cast<double>(n) * time.dt, src) / dirac;
    return table;
}

ForwardResult run_forward(const ScalarField& gamma, const MaterialModel& material,
                          const TimeAxis& time, const SourceSpec& src,
                          const SensorArray& sensors, bool store_history) {
    return run_forward_table(gamma, material, time, burst_table(gamma.grid, time, src), sensors,
                             store_history);
}

}  // namespace fwi
