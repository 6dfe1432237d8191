#ifndef FWI_ADJOINT_HPP
#define FWI_ADJOINT_HPP

#include <vector>

#include "fwi/ansatz.hpp"
#include "fwi/field.hpp"
#include "fwi/wave.hpp"

namespace fwi {

/// Sensor-wise prediction-minus-data mismatch, same layout as ShotRecord.
using ResidualRecord = ShotRecord;

/// The adjoint wavefield, stored forward in physical time like the forward
/// history; its last two snapshots are zero (terminal conditions).
using AdjointHistory = WavefieldHistory;

/// Time quadrature of the measurement misfit. The default is a left Riemann
/// sum over steps 0..n_steps-1 with weight dt, matching the solver's time
/// sampling; `trapezoid` switches to trapezoid end weights.
double measurement_loss(const ShotRecord& prediction, const ShotRecord& data,
                        const TimeAxis& time, bool trapezoid = false);

/// prediction - data, validated to have matching shapes.
ResidualRecord residual_record(const ShotRecord& prediction, const ShotRecord& data);

/// Quadrature weight of time sample n in the measurement loss.
double loss_time_weight(std::size_t n, std::size_t n_steps, bool trapezoid);

/// Continuous adjoint field: the self-adjoint wave operator is run on the
/// time-reversed, negated residual injected at the sensor nodes, and the
/// output is reversed in time. The injected delta is scaled by the nodal
/// quadrature volume, which halves per boundary axis; this keeps the kernel
/// gradient consistent with the discrete misfit when sensors sit on the
/// boundary. Terminal conditions are zero by construction.
AdjointHistory run_adjoint(const ScalarField& gamma, const MaterialModel& material,
                           const TimeAxis& time, const ResidualRecord& residual,
                           bool trapezoid = false);

/// Frechet kernel K(x) = sum_t [ -rho0 u+_t u_t + rho0 c0^2 grad u+ . grad u ] dt
/// with central differences in time and space, one-sided at the ends and at
/// boundary nodes. The kernel is the misfit sensitivity density w.r.t. the
/// indicator.
ScalarField frechet_kernel(const WavefieldHistory& forward, const AdjointHistory& adjoint,
                           const MaterialModel& material);

/// Kernel density integrated over each coefficient's support by nodal
/// quadrature (sum of kernel values in the voxel times the cell volume).
std::vector<double> gradient_wrt_coeffs(const ScalarField& kernel, const ConstantAnsatz& ansatz);

/// Nodal misfit gradient from the kernel density: K(x) times the nodal cell
/// volume, comparable with the discrete reverse-solver gradient.
ScalarField nodal_gradient_from_kernel(const ScalarField& kernel);

}  // namespace fwi

#endif
