#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "fwi/config.hpp"
#include "fwi/io.hpp"
#include "fwi/phantom.hpp"
#include "fwi/refdata.hpp"

using namespace fwi;

namespace {

const char* kBaseConfig = R"(
# desk-scale smoke case
[grid]
dims = 16 10
extent = 0.1 0.06

[material]
rho0 = 2700
c0 = 6000
eps = 1e-5
upper = 1.0

[time]
dt = 4e-7
n_steps = 60

[source]
position = 8 7
amplitude = 1e10
frequency = 1.2e5
cycles = 2

[sensors]
positions = 2 9; 8 9; 13 9

[void]
shape = circle
center = 0.05 0.03
radius = 0.012

[train]
strategy = adjoint-constant
epochs = 3
lr = 6e-2

[output]
directory = out
)";

CaseConfig parse(const std::string& text) {
    std::stringstream ss(text);
    return parse_case_config(ss);
}

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("field file round-trips random fields bit-exactly") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1e9, 1e9);
    std::uniform_int_distribution<std::size_t> dim(3, 9);
    for (int trial = 0; trial < 1000; ++trial) {
        const bool volume = trial % 3 == 0;
        std::vector<std::size_t> dims{dim(rng), dim(rng)};
        std::vector<double> extent{u(rng) > 0 ? 1.25 : 0.4, 2.0};
        if (volume) {
            dims.push_back(dim(rng));
            extent.push_back(0.7);
        }
        ScalarField f(make_grid(dims, extent));
        for (double& v : f.values) v = u(rng) * std::exp(-u(rng) / 1e9);

        std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
        write_field(buf, f);
        const ScalarField g = read_field(buf);
        REQUIRE(g.grid.dims == f.grid.dims);
        for (std::size_t d = 0; d < dims.size(); ++d)
            CHECK(g.grid.spacing[d] == f.grid.spacing[d]);
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(g.values[i] == f.values[i]);
    }
}

TEST_CASE("field file rejects corrupt input") {
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    buf.write("FWIX", 4);
    CHECK_THROWS(read_field(buf));

    ScalarField f(make_grid({4, 4}, {1.0, 1.0}));
    std::stringstream ok(std::ios::in | std::ios::out | std::ios::binary);
    write_field(ok, f);
    std::string bytes = ok.str();
    bytes.resize(bytes.size() - 5);   // truncate payload
    std::stringstream cut(bytes, std::ios::in | std::ios::binary);
    CHECK_THROWS(read_field(cut));
}

TEST_CASE("record file round-trips bit-exactly") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3e6, 3e6);
    SensorArray sensors{{{1, 1}, {2, 3}, {4, 2}}};
    ShotRecord rec(sensors, TimeAxis{3.7e-8, 25});
    for (double& v : rec.samples) v = u(rng);

    std::stringstream buf;
    write_record(buf, rec);
    const RecordData data = read_record(buf);
    REQUIRE(data.n_sensors == 3);
    const ShotRecord back = to_shot_record(data, sensors);
    CHECK(back.time.dt == rec.time.dt);
    CHECK(back.time.n_steps == rec.time.n_steps);
    for (std::size_t i = 0; i < rec.samples.size(); ++i)
        CHECK(back.samples[i] == rec.samples[i]);
}

TEST_CASE("checkpoint blocks round-trip") {
    NamedBlocks blocks;
    blocks.add("params", {1.0, -2.5, 3e-17});
    blocks.add("latent_shape", {8.0, 4.0, 2.0});
    std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
    write_blocks(buf, blocks);
    const NamedBlocks back = read_blocks(buf);
    CHECK(back.has("params"));
    CHECK(!back.has("gamma"));
    CHECK(back.get("params") == blocks.get("params"));
    CHECK(back.get("latent_shape") == blocks.get("latent_shape"));
    CHECK_THROWS(back.get("gamma"));
}

TEST_CASE("a valid case config parses completely") {
    const CaseConfig cfg = parse(kBaseConfig);
    CHECK(cfg.grid.dims == std::vector<std::size_t>{16, 10});
    CHECK(cfg.material.rho0 == 2700.0);
    CHECK(cfg.time.n_steps == 60);
    CHECK(cfg.sources.size() == 1);
    CHECK(cfg.sensors.count() == 3);
    CHECK(cfg.voids.size() == 1);
    CHECK(cfg.train.strategy == Strategy::AdjointConstant);
    CHECK(cfg.output_dir == "out");
    const ScalarField truth = cfg.truth();
    std::size_t voided = 0;
    for (double v : truth.values) voided += v == cfg.material.eps;
    CHECK(voided > 0);
}

TEST_CASE("config errors name the offending key") {
    auto check_message = [&](const std::string& text, const std::string& needle) {
        try {
            parse(text);
            FAIL_CHECK("expected a config error mentioning: " << needle);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };

    check_message(replace_once(kBaseConfig, "rho0 = 2700", "rho0 = fast"), "rho0");
    check_message(replace_once(kBaseConfig, "dt = 4e-7", "dt = -4e-7"), "[time]");
    check_message(replace_once(kBaseConfig, "[material]", "[materials]"), "materials");
    check_message(replace_once(kBaseConfig, "eps = 1e-5", "eps = 1e-5\nshear = 2"), "shear");
    check_message(replace_once(kBaseConfig, "position = 8 7", "position = 0 7"), "[source]");
    check_message(replace_once(kBaseConfig, "strategy = adjoint-constant", "strategy = hybrid"),
                  "[network]");
    check_message(replace_once(kBaseConfig, "radius = 0.012", "radius = 0.2"), "[void]");
    check_message(replace_once(kBaseConfig, "epochs = 3", "epochs = 0"), "epochs");
    check_message(replace_once(kBaseConfig, "lr = 6e-2", "lr = 6e-2\nlr = 1"), "duplicate");
}

TEST_CASE("phantoms rasterize voids at the stated area fraction") {
    const double dx = 0.1 / 251.0;
    const Grid g = make_grid({252, 124}, {0.1, 123.0 * dx});
    SUBCASE("no voids") {
        const ScalarField f = build_phantom({}, g, 1e-5);
        for (double v : f.values) CHECK(v == 1.0);
    }
    SUBCASE("5 mm circle at the plate center") {
        VoidShape v;
        v.center = {0.05, 0.0245};
        v.radius = 0.0025;
        const ScalarField f = build_phantom({v}, g, 1e-5);
        std::size_t count = 0;
        for (double val : f.values) count += val == 1e-5;
        const double expected = 3.14159265358979 * 0.0025 * 0.0025 / (dx * dx);
        CHECK(std::abs(static_cast<double>(count) - expected) <= 0.05 * expected);
    }
    SUBCASE("disjoint voids occupy disjoint node sets") {
        VoidShape a, b;
        a.center = {0.03, 0.0245};
        a.radius = 0.004;
        b.center = {0.07, 0.0245};
        b.radius = 0.004;
        const ScalarField fa = build_phantom({a}, g, 1e-5);
        const ScalarField fb = build_phantom({b}, g, 1e-5);
        for (std::size_t i = 0; i < fa.size(); ++i)
            CHECK((fa.values[i] == 1.0 || fb.values[i] == 1.0));
    }
    SUBCASE("shapes outside the domain are rejected") {
        VoidShape v;
        v.center = {0.001, 0.0245};
        v.radius = 0.01;   // sticks out of the left edge
        CHECK_THROWS(build_phantom({v}, g, 1e-5));
    }
}

TEST_CASE("reference data at refine 1 reproduces the coarse forward run") {
    const CaseConfig cfg = parse(kBaseConfig);
    const auto ref = make_reference_data(cfg, 1);
    const ScalarField truth = cfg.truth();
    REQUIRE(ref.size() == 1);
    const auto direct =
        run_forward(truth, cfg.material, cfg.time, cfg.sources[0], cfg.sensors, false);
    for (std::size_t i = 0; i < direct.record.samples.size(); ++i)
        CHECK(ref[0].samples[i] == direct.record.samples[i]);
}

TEST_CASE("refined data differs from the inverse-crime data") {
    const CaseConfig cfg = parse(kBaseConfig);
    const auto crime = make_reference_data(cfg, 1);
    const auto fair = make_reference_data(cfg, 2);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < crime[0].samples.size(); ++i) {
        diff += std::pow(crime[0].samples[i] - fair[0].samples[i], 2);
        norm += std::pow(crime[0].samples[i], 2);
    }
    REQUIRE(norm > 0.0);
    CHECK(std::sqrt(diff / norm) > 1e-6);
}

TEST_CASE("coarse and refined traces agree before the first reflection") {
    // homogeneous plate, wavelength ~35 nodes, sensor 12 nodes from the
    // source; the shortest reflected path arrives at ~11.8 us after start
    const char* text = R"(
[grid]
dims = 60 40
extent = 0.1 0.0661016949152542

[material]
rho0 = 2700
c0 = 6000
eps = 1e-5
upper = 1.0

[time]
dt = 1.5e-7
n_steps = 80

[source]
position = 20 20
amplitude = 1e10
frequency = 1e5
cycles = 1

[sensors]
positions = 32 20

[train]
strategy = adjoint-constant
epochs = 1
lr = 6e-2
)";
    const CaseConfig cfg = parse(text);
    const auto coarse = make_reference_data(cfg, 1);
    const auto fine = make_reference_data(cfg, 2);
    double diff = 0.0, norm = 0.0;
    for (std::size_t n = 0; n <= 73; ++n) {   // 10.9 us, inside the direct window
        diff += std::pow(coarse[0].at(0, n) - fine[0].at(0, n), 2);
        norm += std::pow(fine[0].at(0, n), 2);
    }
    REQUIRE(norm > 0.0);
    CHECK(std::sqrt(diff / norm) <= 0.02);
}

TEST_CASE("reference data generation is deterministic") {
    const CaseConfig cfg = parse(kBaseConfig);
    const auto a = make_reference_data(cfg, 2);
    const auto b = make_reference_data(cfg, 2);
    std::stringstream sa, sb;
    write_record(sa, a[0]);
    write_record(sb, b[0]);
    CHECK(sa.str() == sb.str());
}

TEST_CASE("text and vtk exports are well-formed") {
    ScalarField f(make_grid({3, 4}, {1.0, 1.5}));
    for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = static_cast<double>(i);
    std::stringstream txt;
    write_text_matrix(txt, f);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(txt, line)) ++lines;
    CHECK(lines == 3);

    std::stringstream vtk;
    write_legacy_vtk(vtk, f, "gamma");
    const std::string body = vtk.str();
    CHECK(body.find("STRUCTURED_POINTS") != std::string::npos);
    CHECK(body.find("DIMENSIONS 3 4 1") != std::string::npos);
    CHECK(body.find("POINT_DATA 12") != std::string::npos);
}

TEST_CASE("shipped case files parse and validate") {
#ifdef FWI_CASES_DIR
    for (const char* name : {"desk.cfg", "desk_hybrid.cfg", "desk_pinn.cfg", "gradcheck.cfg",
                             "plate2d.cfg", "plate2d_hybrid.cfg"}) {
        CAPTURE(name);
        CHECK_NOTHROW(load_case_config(std::string(FWI_CASES_DIR) + "/" + name));
    }
#endif
}
