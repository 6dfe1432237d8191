#include "fwi/ansatz.hpp"

#include <stdexcept>

namespace fwi {

ConstantAnsatz ConstantAnsatz::uniform(const Grid& grid, double value, double eps, double upper,
                                       std::vector<std::size_t> nodes_per_voxel) {
    ConstantAnsatz a;
    a.grid = grid;
    a.nodes_per_voxel =
        nodes_per_voxel.empty() ? std::vector<std::size_t>(grid.rank(), 1) : nodes_per_voxel;
    a.eps = eps;
    a.upper = upper;
    a.validate();
    a.coeffs.assign(a.voxel_count(), value);
    return a;
}

std::vector<std::size_t> ConstantAnsatz::voxel_dims() const {
    std::vector<std::size_t> vd(grid.rank());
    for (std::size_t d = 0; d < grid.rank(); ++d) vd[d] = grid.dims[d] / nodes_per_voxel[d];
    return vd;
}

std::size_t ConstantAnsatz::voxel_count() const {
    std::size_t n = 1;
    for (std::size_t v : voxel_dims()) n *= v;
    return n;
}

std::size_t ConstantAnsatz::voxel_of_node(std::size_t node) const {
    const auto str = grid.strides();
    const auto vd = voxel_dims();
    std::size_t voxel = 0;
    std::size_t vstride = 1;
    for (std::size_t d = grid.rank(); d-- > 0;) {
        const std::size_t coord = (node / str[d]) % grid.dims[d];
        voxel += (coord / nodes_per_voxel[d]) * vstride;
        vstride *= vd[d];
    }
    return voxel;
}

void ConstantAnsatz::validate() const {
    if (nodes_per_voxel.size() != grid.rank())
        throw std::invalid_argument("ansatz: voxel layout rank mismatch");
    for (std::size_t d = 0; d < grid.rank(); ++d) {
        if (nodes_per_voxel[d] == 0 || grid.dims[d] % nodes_per_voxel[d] != 0)
            throw std::invalid_argument("ansatz: voxel layout must tile the grid exactly");
    }
    if (!(eps > 0.0 && eps < upper))
        throw std::invalid_argument("ansatz: requires 0 < eps < upper");
    if (!coeffs.empty() && coeffs.size() != voxel_count())
        throw std::invalid_argument("ansatz: coefficient count does not match voxel layout");
}

ScalarField eval_constant(const ConstantAnsatz& ansatz) {
    ansatz.validate();
    if (ansatz.coeffs.size() != ansatz.voxel_count())
        throw std::invalid_argument("ansatz: coefficient count does not match voxel layout");
    ScalarField out(ansatz.grid);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] =
            clip_indicator(ansatz.coeffs[ansatz.voxel_of_node(i)], ansatz.eps, ansatz.upper);
    return out;
}

std::vector<double> sum_over_voxels(const ScalarField& nodal, const ConstantAnsatz& ansatz) {
    if (nodal.grid != ansatz.grid)
        throw std::invalid_argument("ansatz: nodal field grid does not match voxel layout");
    std::vector<double> out(ansatz.voxel_count(), 0.0);
    for (std::size_t i = 0; i < nodal.size(); ++i)
        out[ansatz.voxel_of_node(i)] += nodal.values[i];
    return out;
}

std::vector<double> chain_to_coeffs(const ScalarField& nodal_kernel,
                                    const ConstantAnsatz& ansatz) {
    std::vector<double> out = sum_over_voxels(nodal_kernel, ansatz);
    const double vol = ansatz.grid.cell_volume();
    for (double& v : out) v *= vol;
    return out;
}

}  // namespace fwi
