#ifndef FWI_WAVE_HPP
#define FWI_WAVE_HPP

#include <cstddef>
#include <optional>
#include <vector>

#include "fwi/field.hpp"

namespace fwi {

/// Sine-burst point source. Positions are grid node indices; the node must be
/// strictly interior.
struct SourceSpec {
    std::vector<std::size_t> position;
    double amplitude;   // psi0 [kg (ms)^-2]
    double frequency;   // f_psi [Hz]
    int cycles;         // n_c

    void validate(const Grid& grid) const;
};

/// psi0 sin(w t) sin(w t / (2 n_c)) inside the burst window [0, 2 pi n_c / w],
/// exactly zero at and beyond the window end.
double sine_burst(double t, const SourceSpec& src);

/// Adds sine_burst(t)/||dx||^2 at the source node; the squared-spacing norm is
/// the Dirac scaling of a grid point source.
void inject_source(ScalarField& force, const SourceSpec& src, double t);

struct SensorArray {
    std::vector<std::vector<std::size_t>> positions;   // node index per axis

    std::size_t count() const { return positions.size(); }
    void validate(const Grid& grid) const;             // distinct, on-grid
    std::vector<std::size_t> flat_nodes(const Grid& grid) const;
};

/// Sensor traces for one shot: samples[s * (n_steps+1) + n] = u^n at sensor s.
struct ShotRecord {
    SensorArray sensors;
    TimeAxis time;
    std::vector<double> samples;

    ShotRecord() = default;
    ShotRecord(const SensorArray& s, const TimeAxis& t)
        : sensors(s), time(t), samples(s.count() * (t.n_steps + 1), 0.0) {}

    std::size_t steps() const { return time.n_steps + 1; }
    double& at(std::size_t sensor, std::size_t step) { return samples[sensor * steps() + step]; }
    double at(std::size_t sensor, std::size_t step) const { return samples[sensor * steps() + step]; }
};

/// Full interior wavefield of one shot, snapshots 0..n_steps. The first two
/// snapshots are zero (homogeneous initial conditions).
struct WavefieldHistory {
    Grid grid;
    TimeAxis time;
    std::vector<double> data;   // (n_steps+1) * num_nodes, step-major

    WavefieldHistory() = default;
    WavefieldHistory(const Grid& g, const TimeAxis& t)
        : grid(g), time(t), data((t.n_steps + 1) * g.num_nodes(), 0.0) {}

    double* step(std::size_t n) { return data.data() + n * grid.num_nodes(); }
    const double* step(std::size_t n) const { return data.data() + n * grid.num_nodes(); }
};

/// Per-step force-field values applied at a list of nodes. Point-source
/// conventions (Dirac scaling) are the table builder's responsibility.
struct SourceTable {
    std::vector<std::size_t> nodes;
    std::vector<double> values;   // nodes.size() * (n_steps+1), node-major

    double value(std::size_t s, std::size_t step, std::size_t n_samples) const {
        return values[s * n_samples + step];
    }
};

/// One leapfrog update of the indicator-scaled scalar wave equation:
///   u_next = 2 u - u_prev
///          + (2/g) sum_d (c0 dt/h_d)^2 [ H(g, g_up)(u_up - u) - H(g_dn, g)(u - u_dn) ]
///          + dt^2/(rho0 g) f
/// with H the harmonic face average H(a,b) = 1/(1/a + 1/b) and mirrored ghost
/// neighbors for both u and gamma. `force` may be null (no forcing).
void step_wavefield(const ScalarField& u_prev, const ScalarField& u_curr,
                    const ScalarField& gamma, const ScalarField* force,
                    const MaterialModel& material, const TimeAxis& time,
                    const NeighborTable& nb, ScalarField& u_next);

struct ForwardResult {
    std::optional<WavefieldHistory> history;
    ShotRecord record;
};

/// Time loop driven by an arbitrary source table (used by the adjoint solver
/// and by record-driven sources).
ForwardResult run_forward_table(const ScalarField& gamma, const MaterialModel& material,
                                const TimeAxis& time, const SourceTable& table,
                                const SensorArray& sensors, bool store_history);

/// The non-trainable forward operator: burst point source, sensor recording,
/// optional full history for the adjoint.
ForwardResult run_forward(const ScalarField& gamma, const MaterialModel& material,
                          const TimeAxis& time, const SourceSpec& src,
                          const SensorArray& sensors, bool store_history);

/// Burst samples on the time axis as force-field values at the source node,
/// i.e. sine_burst(t)/||dx||^2.
SourceTable burst_table(const Grid& grid, const TimeAxis& time, const SourceSpec& src);

}  // namespace fwi

#endif
