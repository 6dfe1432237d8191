#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "fwi/adjoint.hpp"
#include "fwi/field.hpp"
#include "fwi/reverse.hpp"
#include "fwi/wave.hpp"

using namespace fwi;

namespace {

const MaterialModel kMat{2700.0, 6000.0, 1e-5, 1.0};

struct SmallCase {
    Grid grid = make_grid({8, 6}, {0.07, 0.05});
    TimeAxis time{1e-6, 5};
    SourceSpec src{{3, 2}, 1e6, 1.25e5, 1};   // burst window covers all steps
    SensorArray sensors{{{2, 1}, {5, 3}, {6, 4}, {1, 4}}};
    ShotRecord data;

    SmallCase() {
        ScalarField ones(grid, 1.0);
        data = run_forward(ones, kMat, time, src, sensors, false).record;
    }

    double loss(const ScalarField& gamma) const {
        const auto r = run_forward(gamma, kMat, time, src, sensors, false).record;
        return measurement_loss(r, data, time);
    }
};

ScalarField random_gamma(const Grid& g, std::uint64_t seed, double lo = 0.2, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    ScalarField f(g);
    for (double& v : f.values) v = u(rng);
    return f;
}

// central difference of the discrete loss, one gamma node at a time
ScalarField fd_gradient(const SmallCase& c, const ScalarField& gamma, double rel_step) {
    ScalarField grad(gamma.grid);
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const double h = rel_step * std::abs(gamma.values[i]);
        ScalarField gp = gamma, gm = gamma;
        gp.values[i] += h;
        gm.values[i] -= h;
        grad.values[i] = (c.loss(gp) - c.loss(gm)) / (2.0 * h);
    }
    return grad;
}

double max_rel_error(const ScalarField& got, const ScalarField& want) {
    double max_abs = 0.0;
    for (double v : want.values) max_abs = std::max(max_abs, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        const double denom = std::max(std::abs(want.values[i]), 1e-9 * max_abs);
        if (denom == 0.0) continue;   // both exactly zero
        worst = std::max(worst, std::abs(got.values[i] - want.values[i]) / denom);
    }
    return worst;
}

}  // namespace

TEST_CASE("zero incoming cotangent leaves everything unchanged") {
    const Grid g = make_grid({6, 5}, {0.5, 0.4});
    const NeighborTable nb(g);
    const TimeAxis t{1e-5, 3};
    ScalarField zero(g), cot_curr(g, 0.5), cot_prev(g, -0.25), accum(g, 2.0);
    ScalarField u = random_gamma(g, 3, -1.0, 1.0);
    ScalarField gamma = random_gamma(g, 4, 0.3, 1.0);
    reverse_step(zero, cot_curr, cot_prev, u, nullptr, gamma, kMat, t, nb, accum);
    for (double v : cot_curr.values) CHECK(v == 0.5);
    for (double v : cot_prev.values) CHECK(v == -0.25);
    for (double v : accum.values) CHECK(v == 2.0);
}

TEST_CASE("cotangent flows to u_prev with factor -1") {
    const Grid g = make_grid({6, 5}, {0.5, 0.4});
    const NeighborTable nb(g);
    const TimeAxis t{1e-5, 3};
    ScalarField w(g), cot_curr(g), cot_prev(g), accum(g);
    ScalarField u(g), gamma(g, 1.0);
    w.values[g.flat({3, 2})] = 2.0;
    reverse_step(w, cot_curr, cot_prev, u, nullptr, gamma, kMat, t, nb, accum);
    CHECK(cot_prev.values[g.flat({3, 2})] == -2.0);
    std::size_t nonzero = 0;
    for (double v : cot_prev.values) nonzero += (v != 0.0);
    CHECK(nonzero == 1);
}

TEST_CASE("reverse sweep gradient matches the central FD oracle") {
    SmallCase c;
    const ScalarField gamma = random_gamma(c.grid, 17);
    const auto bp = backprop_through_solver(gamma, kMat, c.time, c.src, c.sensors, c.data);
    const ScalarField fd = fd_gradient(c, gamma, 1e-6);
    CHECK(max_rel_error(bp.gradient, fd) <= 1e-6);

    // the oracle itself is nontrivial
    double norm = 0.0;
    for (double v : fd.values) norm += v * v;
    CHECK(norm > 0.0);
}

TEST_CASE("zero residual gives an exactly zero gradient") {
    SmallCase c;
    const ScalarField gamma = random_gamma(c.grid, 23);
    const auto self = run_forward(gamma, kMat, c.time, c.src, c.sensors, false).record;
    const auto bp = backprop_through_solver(gamma, kMat, c.time, c.src, c.sensors, self);
    CHECK(bp.loss == 0.0);
    for (double v : bp.gradient.values) CHECK(v == 0.0);
}

TEST_CASE("seeding is linear in the residual") {
    SmallCase c;
    const ScalarField gamma = random_gamma(c.grid, 29);
    // data scaled about the prediction scales the residual, hence the gradient
    const auto pred = run_forward(gamma, kMat, c.time, c.src, c.sensors, false).record;
    ShotRecord data1 = c.data, data2 = c.data;
    for (std::size_t i = 0; i < data2.samples.size(); ++i)
        data2.samples[i] = pred.samples[i] + 2.0 * (data1.samples[i] - pred.samples[i]);
    const auto g1 = backprop_through_solver(gamma, kMat, c.time, c.src, c.sensors, data1);
    const auto g2 = backprop_through_solver(gamma, kMat, c.time, c.src, c.sensors, data2);
    for (std::size_t i = 0; i < g1.gradient.size(); ++i)
        CHECK(g2.gradient.values[i] == doctest::Approx(2.0 * g1.gradient.values[i])
                                           .epsilon(1e-12));
}

TEST_CASE("dot-product test for one transposed step") {
    const Grid g = make_grid({9, 7}, {0.08, 0.06});
    const NeighborTable nb(g);
    const TimeAxis t{8e-7, 4};
    const ScalarField gamma = random_gamma(g, 31, 0.3, 1.0);
    const ScalarField u_prev = random_gamma(g, 37, -1.0, 1.0);
    const ScalarField u_curr = random_gamma(g, 41, -1.0, 1.0);
    const ScalarField w = random_gamma(g, 43, -1.0, 1.0);

    ScalarField out_base(g);
    step_wavefield(u_prev, u_curr, gamma, nullptr, kMat, t, nb, out_base);

    // reverse side: J^T w for all three inputs
    ScalarField cot_curr(g), cot_prev(g), cot_gamma(g);
    reverse_step(w, cot_curr, cot_prev, u_curr, nullptr, gamma, kMat, t, nb, cot_gamma);

    auto dot = [](const ScalarField& a, const ScalarField& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a.values[i] * b.values[i];
        return s;
    };

    SUBCASE("u_curr direction (step is linear in u)") {
        const ScalarField v = random_gamma(g, 47, -1.0, 1.0);
        const double eps = 0.5;
        ScalarField up(g), um(g), pert = u_curr;
        for (std::size_t i = 0; i < g.num_nodes(); ++i) pert.values[i] += eps * v.values[i];
        step_wavefield(u_prev, pert, gamma, nullptr, kMat, t, nb, up);
        for (std::size_t i = 0; i < g.num_nodes(); ++i)
            pert.values[i] = u_curr.values[i] - eps * v.values[i];
        step_wavefield(u_prev, pert, gamma, nullptr, kMat, t, nb, um);
        ScalarField jv(g);
        for (std::size_t i = 0; i < g.num_nodes(); ++i)
            jv.values[i] = (up.values[i] - um.values[i]) / (2.0 * eps);
        const double lhs = dot(jv, w);
        const double rhs = dot(v, cot_curr);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(std::abs(lhs), 1.0));
    }
    SUBCASE("gamma direction") {
        const ScalarField v = random_gamma(g, 53, -1.0, 1.0);
        const double eps = 3e-6;
        ScalarField up(g), um(g), pert = gamma;
        for (std::size_t i = 0; i < g.num_nodes(); ++i) pert.values[i] += eps * v.values[i];
        step_wavefield(u_prev, u_curr, pert, nullptr, kMat, t, nb, up);
        for (std::size_t i = 0; i < g.num_nodes(); ++i)
            pert.values[i] = gamma.values[i] - eps * v.values[i];
        step_wavefield(u_prev, u_curr, pert, nullptr, kMat, t, nb, um);
        double lhs = 0.0;
        for (std::size_t i = 0; i < g.num_nodes(); ++i)
            lhs += (up.values[i] - um.values[i]) / (2.0 * eps) * w.values[i];
        const double rhs = dot(v, cot_gamma);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max({std::abs(lhs), std::abs(rhs), 1.0}));
    }
    SUBCASE("u_prev direction is exactly -w") {
        for (std::size_t i = 0; i < g.num_nodes(); ++i)
            CHECK(cot_prev.values[i] == -w.values[i]);
    }
}

TEST_CASE("gradient is deterministic across repeated sweeps") {
    SmallCase c;
    const ScalarField gamma = random_gamma(c.grid, 59);
    const auto a = backprop_through_solver(gamma, kMat, c.time, c.src, c.sensors, c.data);
    const auto b = backprop_through_solver(gamma, kMat, c.time, c.src, c.sensors, c.data);
    for (std::size_t i = 0; i < a.gradient.size(); ++i)
        CHECK(a.gradient.values[i] == b.gradient.values[i]);
}
