#ifndef FWI_FIELD_HPP
#define FWI_FIELD_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fwi {

/// Non-finite values appeared in a simulation or network evaluation; mapped
/// to exit code 2 by the CLI.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Regular node-centered grid, 2D or 3D. Fields live on the full node set;
/// ghost layers are never stored, they are materialized transiently by the
/// solver via mirror indexing.
struct Grid {
    std::vector<std::size_t> dims;    // node count per axis (>= 3 each)
    std::vector<double> spacing;      // node distance per axis [m]
    std::vector<double> extent;       // physical length per axis [m]
    int ghost_layers = 2;

    std::size_t rank() const { return dims.size(); }
    std::size_t num_nodes() const;
    std::vector<std::size_t> strides() const;   // row-major, last axis fastest
    std::size_t flat(const std::vector<std::size_t>& idx) const;
    double cell_volume() const;                 // product of spacings
    double squared_spacing_norm() const;        // sum of spacing^2 (Dirac scale)

    /// Quadrature volume owned by a node: the cell volume halved once per
    /// axis on which the node lies on the boundary.
    double node_volume(std::size_t node) const;

    bool operator==(const Grid&) const = default;
};

/// spacing derived as extent/(dims-1); throws on rank mismatch or
/// non-positive entries.
Grid make_grid(const std::vector<std::size_t>& dims,
               const std::vector<double>& extent, int ghost_layers = 2);

/// extent derived as spacing*(dims-1); used when loading serialized fields.
Grid grid_from_spacing(const std::vector<std::size_t>& dims,
                       const std::vector<double>& spacing, int ghost_layers = 2);

/// Full invariant check on an assembled Grid: rank 2 or 3, node counts >= 3,
/// positive spacing, spacing consistent with extent/(dims-1) to 1e-12
/// relative, ghost layers covering the stencil radius.
void validate_grid(const Grid& grid);

/// One real value per grid node, row-major with the last axis fastest.
struct ScalarField {
    Grid grid;
    std::vector<double> values;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid(g), values(g.num_nodes(), fill) {}

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }

    void fill(double v);
};

/// Intact-material constants plus the admissible indicator range.
struct MaterialModel {
    double rho0;    // density of intact material [kg/m^3]
    double c0;      // wave speed [m/s]
    double eps;     // lower indicator bound, models void
    double upper;   // upper indicator bound

    void validate() const;  // rho0>0, c0>0, 0<eps<upper<=1.5
};

struct TimeAxis {
    double dt;            // timestep [s]
    std::size_t n_steps;  // update count; stored snapshots = n_steps+1

    void validate() const;
    double duration() const { return dt * static_cast<double>(n_steps); }
};

double clip_indicator(double v, double eps, double upper);
ScalarField clip_indicator(const ScalarField& f, double eps, double upper);

/// Mean over nodes of (a-b)^2; throws on grid mismatch.
double field_mse(const ScalarField& a, const ScalarField& b);

/// c0*dt*sqrt(sum_d 1/h_d^2); explicit stepping requires < 1.
double courant_number(const Grid& grid, double c0, double dt);

/// Precomputed mirror-reflected neighbor indices per axis. Ghost nodes are
/// the first interior neighbor mirrored about the boundary node, which
/// enforces a zero normal derivative to second order; the same table is used
/// for u and for gamma.
struct NeighborTable {
    std::size_t rank = 0;
    std::size_t n = 0;
    std::vector<std::size_t> up;    // rank * n entries, axis-major
    std::vector<std::size_t> dn;

    explicit NeighborTable(const Grid& grid);

    std::size_t up_of(std::size_t axis, std::size_t node) const { return up[axis * n + node]; }
    std::size_t dn_of(std::size_t axis, std::size_t node) const { return dn[axis * n + node]; }
};

}  // namespace fwi

#endif
