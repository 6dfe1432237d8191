#include "fwi/phantom.hpp"

#include <stdexcept>

namespace fwi {

bool VoidShape::contains(const std::vector<double>& point) const {
    if (kind == Kind::Ball) {
        double r2 = 0.0;
        for (std::size_t d = 0; d < center.size(); ++d) {
            const double dx = point[d] - center[d];
            r2 += dx * dx;
        }
        return r2 < radius * radius;
    }
    for (std::size_t d = 0; d < lo.size(); ++d)
        if (point[d] < lo[d] || point[d] > hi[d]) return false;
    return true;
}

void VoidShape::validate(const Grid& grid) const {
    const std::size_t rank = grid.rank();
    if (kind == Kind::Ball) {
        if (center.size() != rank) throw std::invalid_argument("void.center: rank mismatch");
        if (!(radius > 0.0)) throw std::invalid_argument("void.radius: must be > 0");
        for (std::size_t d = 0; d < rank; ++d)
            if (center[d] - radius < 0.0 || center[d] + radius > grid.extent[d])
                throw std::invalid_argument("void: shape extends outside the domain");
    } else {
        if (lo.size() != rank || hi.size() != rank)
            throw std::invalid_argument("void.min/max: rank mismatch");
        for (std::size_t d = 0; d < rank; ++d) {
            if (!(lo[d] < hi[d])) throw std::invalid_argument("void: empty box");
            if (lo[d] < 0.0 || hi[d] > grid.extent[d])
                throw std::invalid_argument("void: shape extends outside the domain");
        }
    }
}

ScalarField build_phantom(const std::vector<VoidShape>& voids, const Grid& grid, double eps) {
    for (const auto& v : voids) v.validate(grid);
    ScalarField gamma(grid, 1.0);
    const auto str = grid.strides();
    std::vector<double> point(grid.rank());
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        for (std::size_t d = 0; d < grid.rank(); ++d)
            point[d] = static_cast<double>((i / str[d]) % grid.dims[d]) * grid.spacing[d];
        for (const auto& v : voids)
            if (v.contains(point)) {
                gamma.values[i] = eps;
                break;
            }
    }
    return gamma;
}

}  // namespace fwi
