#include "fwi/field.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fwi {

std::size_t Grid::num_nodes() const {
    std::size_t n = 1;
    for (std::size_t d : dims) n *= d;
    return n;
}

std::vector<std::size_t> Grid::strides() const {
    std::vector<std::size_t> s(dims.size(), 1);
    for (std::size_t d = dims.size(); d-- > 1;) s[d - 1] = s[d] * dims[d];
    return s;
}

std::size_t Grid::flat(const std::vector<std::size_t>& idx) const {
    if (idx.size() != dims.size()) throw std::invalid_argument("grid: index rank mismatch");
    std::size_t n = 0;
    const auto s = strides();
    for (std::size_t d = 0; d < dims.size(); ++d) {
        if (idx[d] >= dims[d]) throw std::out_of_range("grid: node index out of range");
        n += idx[d] * s[d];
    }
    return n;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (double h : spacing) v *= h;
    return v;
}

double Grid::squared_spacing_norm() const {
    double v = 0.0;
    for (double h : spacing) v += h * h;
    return v;
}

double Grid::node_volume(std::size_t node) const {
    double v = cell_volume();
    const auto str = strides();
    for (std::size_t d = 0; d < dims.size(); ++d) {
        const std::size_t c = (node / str[d]) % dims[d];
        if (c == 0 || c == dims[d] - 1) v *= 0.5;
    }
    return v;
}

namespace {

void check_rank(std::size_t rank) {
    if (rank != 2 && rank != 3) throw std::invalid_argument("grid: rank must be 2 or 3");
}

void check_grid(const Grid& g) {
    check_rank(g.dims.size());
    if (g.spacing.size() != g.dims.size() || g.extent.size() != g.dims.size())
        throw std::invalid_argument("grid: dims, spacing and extent must have equal rank");
    for (std::size_t d = 0; d < g.dims.size(); ++d) {
        if (g.dims[d] < 3) throw std::invalid_argument("grid: node count must be >= 3 per axis");
        if (!(g.spacing[d] > 0.0)) throw std::invalid_argument("grid: spacing must be positive");
        if (!(g.extent[d] > 0.0)) throw std::invalid_argument("grid: extent must be positive");
        const double derived = g.extent[d] / static_cast<double>(g.dims[d] - 1);
        if (std::abs(derived - g.spacing[d]) > 1e-12 * std::abs(derived))
            throw std::invalid_argument("grid: spacing inconsistent with extent/(dims-1)");
    }
    if (g.ghost_layers < 1)
        throw std::invalid_argument("grid: ghost_layers must cover the stencil radius (>= 1)");
}

}  // namespace

void validate_grid(const Grid& grid) { check_grid(grid); }

Grid make_grid(const std::vector<std::size_t>& dims, const std::vector<double>& extent,
               int ghost_layers) {
    if (dims.size() != extent.size())
        throw std::invalid_argument("grid: dims and extent must have the same rank");
    check_rank(dims.size());
    Grid g;
    g.dims = dims;
    g.extent = extent;
    g.ghost_layers = ghost_layers;
    g.spacing.resize(dims.size());
    for (std::size_t d = 0; d < dims.size(); ++d) {
        if (dims[d] < 3) throw std::invalid_argument("grid: node count must be >= 3 per axis");
        if (!(extent[d] > 0.0)) throw std::invalid_argument("grid: extent must be positive");
        g.spacing[d] = extent[d] / static_cast<double>(dims[d] - 1);
    }
    check_grid(g);
    return g;
}

Grid grid_from_spacing(const std::vector<std::size_t>& dims, const std::vector<double>& spacing,
                       int ghost_layers) {
    if (dims.size() != spacing.size())
        throw std::invalid_argument("grid: dims and spacing must have the same rank");
    check_rank(dims.size());
    Grid g;
    g.dims = dims;
    g.spacing = spacing;
    g.ghost_layers = ghost_layers;
    g.extent.resize(dims.size());
    for (std::size_t d = 0; d < dims.size(); ++d)
        g.extent[d] = spacing[d] * static_cast<double>(dims[d] - 1);
    check_grid(g);
    return g;
}

void ScalarField::fill(double v) { std::fill(values.begin(), values.end(), v); }

void MaterialModel::validate() const {
    if (!(rho0 > 0.0)) throw std::invalid_argument("material: rho0 must be > 0");
    if (!(c0 > 0.0)) throw std::invalid_argument("material: c0 must be > 0");
    if (!(eps > 0.0 && eps < upper && upper <= 1.5))
        throw std::invalid_argument("material: bounds must satisfy 0 < eps < upper <= 1.5");
}

void TimeAxis::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("time: dt must be > 0");
    if (n_steps < 1) throw std::invalid_argument("time: n_steps must be >= 1");
}

double clip_indicator(double v, double eps, double upper) {
    return std::min(upper, std::max(eps, std::abs(v)));
}

ScalarField clip_indicator(const ScalarField& f, double eps, double upper) {
    if (!(eps > 0.0 && eps < upper))
        throw std::invalid_argument("clip_indicator: requires 0 < eps < upper");
    ScalarField out = f;
    for (double& v : out.values) v = clip_indicator(v, eps, upper);
    return out;
}

double field_mse(const ScalarField& a, const ScalarField& b) {
    if (a.grid != b.grid) throw std::invalid_argument("field_mse: grid mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double d = a.values[i] - b.values[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.values.size());
}

double courant_number(const Grid& grid, double c0, double dt) {
    double s = 0.0;
    for (double h : grid.spacing) s += 1.0 / (h * h);
    return c0 * dt * std::sqrt(s);
}

NeighborTable::NeighborTable(const Grid& grid) {
    rank = grid.rank();
    n = grid.num_nodes();
    up.resize(rank * n);
    dn.resize(rank * n);
    const auto str = grid.strides();
    for (std::size_t d = 0; d < rank; ++d) {
        const std::size_t nd = grid.dims[d];
        const std::size_t sd = str[d];
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t coord = (i / sd) % nd;
            // mirror about the boundary node: ghost(-1) -> node 1
            up[d * n + i] = (coord == nd - 1) ? i - sd : i + sd;
            dn[d * n + i] = (coord == 0) ? i + sd : i - sd;
        }
    }
}

}  // namespace fwi
