#include "fwi/refdata.hpp"

#include <stdexcept>

#include "fwi/phantom.hpp"

namespace fwi {

std::vector<ShotRecord> make_reference_data(const CaseConfig& cfg, std::size_t refine) {
    if (refine < 1) throw std::invalid_argument("make-data: refine must be >= 1");

    const Grid& coarse = cfg.grid;
    std::vector<std::size_t> fine_dims(coarse.rank());
    for (std::size_t d = 0; d < coarse.rank(); ++d)
        fine_dims[d] = refine * (coarse.dims[d] - 1) + 1;
    const Grid fine = make_grid(fine_dims, coarse.extent, coarse.ghost_layers);
    const TimeAxis fine_time{cfg.time.dt / static_cast<double>(refine),
                             cfg.time.n_steps * refine};
    if (!(courant_number(fine, cfg.material.c0, fine_time.dt) < 1.0))
        throw std::invalid_argument("make-data: refined time axis violates the CFL bound");

    const ScalarField gamma = build_phantom(cfg.voids, fine, cfg.material.eps);

    // coarse nodes land on fine nodes by construction
    auto refine_pos = [&](const std::vector<std::size_t>& pos) {
        std::vector<std::size_t> out(pos.size());
        for (std::size_t d = 0; d < pos.size(); ++d) out[d] = pos[d] * refine;
        return out;
    };
    SensorArray fine_sensors;
    for (const auto& p : cfg.sensors.positions) fine_sensors.positions.push_back(refine_pos(p));

    std::vector<ShotRecord> records;
    for (const SourceSpec& src : cfg.sources) {
        SourceSpec fine_src = src;
        fine_src.position = refine_pos(src.position);
        const auto fwd =
            run_forward(gamma, cfg.material, fine_time, fine_src, fine_sensors, false);

        ShotRecord coarse_record(cfg.sensors, cfg.time);
        for (std::size_t s = 0; s < cfg.sensors.count(); ++s)
            for (std::size_t n = 0; n <= cfg.time.n_steps; ++n)
                coarse_record.at(s, n) = fwd.record.at(s, n * refine);
        records.push_back(std::move(coarse_record));
    }
    return records;
}

}  // namespace fwi
