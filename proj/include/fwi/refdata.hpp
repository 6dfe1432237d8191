#ifndef FWI_REFDATA_HPP
#define FWI_REFDATA_HPP

#include <vector>

#include "fwi/config.hpp"
#include "fwi/wave.hpp"

namespace fwi {

/// Reference shot records simulated on a refine-times finer grid with a
/// refine-times smaller timestep, restricted to the coarse sensors and time
/// axis by exact subsampling. refine = 1 reproduces run_forward on the case
/// grid (inverse-crime mode, used by tests). The phantom is rasterized on the
/// fine grid, so the data-generation discretization differs from the
/// inversion discretization for refine >= 2.
std::vector<ShotRecord> make_reference_data(const CaseConfig& cfg, std::size_t refine);

}  // namespace fwi

#endif
