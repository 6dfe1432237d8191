#ifndef FWI_REVERSE_HPP
#define FWI_REVERSE_HPP

#include "fwi/adjoint.hpp"
#include "fwi/field.hpp"
#include "fwi/wave.hpp"

namespace fwi {

/// Exact transpose of one step_wavefield update. Given the cotangent of
/// u_next, distributes onto the cotangents of u_curr and u_prev and
/// accumulates the gamma cotangent, including the derivatives of the harmonic
/// face averages and of the 1/gamma prefactors. `force` is the forcing of the
/// transposed step (may be null).
void reverse_step(const ScalarField& cot_next, ScalarField& cot_curr, ScalarField& cot_prev,
                  const ScalarField& u_curr, const ScalarField* force, const ScalarField& gamma,
                  const MaterialModel& material, const TimeAxis& time, const NeighborTable& nb,
                  ScalarField& gamma_accum);

struct BackpropResult {
    ScalarField gradient;   // d loss / d gamma, nodal
    double loss = 0.0;
    ShotRecord record;      // forward prediction, reusable by drivers
};

/// Reverse-mode differentiation of the discretized problem: runs the forward
/// solver storing all snapshots, seeds the cotangents from the measurement
/// loss at the sensor nodes, and sweeps reverse_step from the last update to
/// the first. Peak memory is the snapshot store plus O(1) extra fields.
BackpropResult backprop_through_solver(const ScalarField& gamma, const MaterialModel& material,
                                       const TimeAxis& time, const SourceSpec& src,
                                       const SensorArray& sensors, const ShotRecord& data,
                                       bool trapezoid = false);

}  // namespace fwi

#endif
