#ifndef FWI_ANSATZ_HPP
#define FWI_ANSATZ_HPP

#include <cstddef>
#include <vector>

#include "fwi/field.hpp"

namespace fwi {

/// Piece-wise constant material Ansatz: one coefficient per voxel, each voxel
/// covering a block of grid nodes. The voxel layout must tile the grid
/// exactly; the default is one voxel per node.
struct ConstantAnsatz {
    Grid grid;
    std::vector<std::size_t> nodes_per_voxel;   // per axis
    std::vector<double> coeffs;                 // row-major over voxels, last axis fastest
    double eps;
    double upper;

    static ConstantAnsatz uniform(const Grid& grid, double value, double eps, double upper,
                                  std::vector<std::size_t> nodes_per_voxel = {});

    std::size_t voxel_count() const;
    std::vector<std::size_t> voxel_dims() const;
    std::size_t voxel_of_node(std::size_t node) const;
    void validate() const;
};

/// Nodal indicator field: each node takes its voxel's clipped coefficient.
ScalarField eval_constant(const ConstantAnsatz& ansatz);

/// Per-voxel sum of a nodal field (the shape-function inner product without
/// quadrature weight).
std::vector<double> sum_over_voxels(const ScalarField& nodal, const ConstantAnsatz& ansatz);

/// Chain rule from a nodal kernel density to coefficients: per-voxel sum of
/// kernel values times the nodal cell volume.
std::vector<double> chain_to_coeffs(const ScalarField& nodal_kernel, const ConstantAnsatz& ansatz);

}  // namespace fwi

#endif
