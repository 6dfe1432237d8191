#ifndef FWI_PHANTOM_HPP
#define FWI_PHANTOM_HPP

#include <vector>

#include "fwi/field.hpp"

namespace fwi {

/// A void region written into the indicator field: circle/sphere by center
/// and radius, or an axis-aligned box by its corners. All coordinates in
/// meters.
struct VoidShape {
    enum class Kind { Ball, Box } kind = Kind::Ball;
    std::vector<double> center;       // ball
    double radius = 0.0;              // ball
    std::vector<double> lo, hi;       // box corners

    bool contains(const std::vector<double>& point) const;
    void validate(const Grid& grid) const;   // inside the domain
};

/// gamma = 1 everywhere except nodes inside a void, where gamma = eps.
ScalarField build_phantom(const std::vector<VoidShape>& voids, const Grid& grid, double eps);

}  // namespace fwi

#endif
