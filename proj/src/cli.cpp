#include "fwi/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fwi/adjoint.hpp"
#include "fwi/config.hpp"
#include "fwi/invert.hpp"
#include "fwi/io.hpp"
#include "fwi/pinn.hpp"
#include "fwi/refdata.hpp"
#include "fwi/reverse.hpp"

namespace fwi {

namespace {

namespace fs = std::filesystem;

std::string shot_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "shot_%03zu.csv", i);
    return buf;
}

void ensure_dir(const std::string& dir) { fs::create_directories(dir); }

std::vector<ShotRecord> load_or_make_data(const CaseConfig& cfg, const std::string& data_dir,
                                          std::size_t refine) {
    std::vector<ShotRecord> data;
    if (!data_dir.empty()) {
        for (std::size_t s = 0; s < cfg.sources.size(); ++s) {
            const auto rec = read_record_file(data_dir + "/" + shot_name(s));
            data.push_back(to_shot_record(rec, cfg.sensors));
            if (data.back().time.n_steps != cfg.time.n_steps)
                throw ConfigError("data: '" + shot_name(s) + "' does not match [time] n_steps");
        }
        return data;
    }
    return make_reference_data(cfg, refine);
}

int cmd_forward(const std::string& config_path, std::size_t source_index, std::size_t stride,
                std::string out_dir) {
    const CaseConfig cfg = load_case_config(config_path);
    if (out_dir.empty()) out_dir = cfg.output_dir;
    if (source_index >= cfg.sources.size())
        throw ConfigError("forward: source index out of range");
    ensure_dir(out_dir);

    const ScalarField gamma = cfg.truth();
    const bool want_history = stride > 0;
    const auto res = run_forward(gamma, cfg.material, cfg.time, cfg.sources[source_index],
                                 cfg.sensors, want_history);

    char buf[64];
    std::snprintf(buf, sizeof(buf), "forward_s%02zu.csv", source_index);
    write_record_file(out_dir + "/" + buf, res.record);
    std::printf("wrote %s/%s\n", out_dir.c_str(), buf);

    if (want_history) {
        for (std::size_t n = 0; n <= cfg.time.n_steps; n += stride) {
            ScalarField snap(cfg.grid);
            std::copy(res.history->step(n), res.history->step(n) + cfg.grid.num_nodes(),
                      snap.values.begin());
            std::snprintf(buf, sizeof(buf), "wavefield_s%02zu_n%05zu.fwif", source_index, n);
            write_field_file(out_dir + "/" + buf, snap);
        }
        std::printf("wrote wavefield snapshots with stride %zu\n", stride);
    }
    return 0;
}

int cmd_make_data(const std::string& config_path, std::size_t refine, std::string out_dir) {
    const CaseConfig cfg = load_case_config(config_path);
    if (out_dir.empty()) out_dir = cfg.output_dir;
    ensure_dir(out_dir);
    const auto records = make_reference_data(cfg, refine);
    for (std::size_t s = 0; s < records.size(); ++s)
        write_record_file(out_dir + "/" + shot_name(s), records[s]);
    write_field_file(out_dir + "/truth.fwif", cfg.truth());
    std::printf("wrote %zu shot records (refine=%zu) and truth.fwif to %s\n", records.size(),
                refine, out_dir.c_str());
    return 0;
}

int cmd_invert(const std::string& config_path, const std::string& data_dir, std::size_t refine,
               std::string out_dir) {
    const CaseConfig cfg = load_case_config(config_path);
    if (out_dir.empty()) out_dir = cfg.output_dir;
    ensure_dir(out_dir);

    TrainingHistory history;
    ScalarField gamma(cfg.grid);
    NamedBlocks checkpoint;
    bool diverged = false;

    if (cfg.train.strategy == Strategy::FullDomainPinn) {
        // full wavefield data comes from the solver itself on this path
        FullDomainProblem problem;
        problem.grid = cfg.grid;
        problem.material = cfg.material;
        problem.time = cfg.time;
        problem.sources = cfg.sources;
        problem.truth = cfg.truth();
        for (const auto& src : cfg.sources)
            problem.wavefields.push_back(
                *run_forward(*problem.truth, cfg.material, cfg.time, src, SensorArray{}, true)
                     .history);
        const auto res = full_domain_pinn_invert(problem, cfg.train, *cfg.network);
        history = res.history;
        diverged = res.diverged;
        gamma = res.network.forward(cfg.grid, nullptr);
        checkpoint.add("params", res.network.parameters());
        checkpoint.add("latent", res.network.latent().data);
        std::vector<double> shape;
        for (std::size_t d : res.network.latent().shape) shape.push_back(static_cast<double>(d));
        checkpoint.add("latent_shape", shape);
        checkpoint.add("lambda", res.lambda.values);
    } else {
        InverseProblem problem;
        problem.grid = cfg.grid;
        problem.material = cfg.material;
        problem.time = cfg.time;
        problem.sources = cfg.sources;
        problem.sensors = cfg.sensors;
        problem.data = load_or_make_data(cfg, data_dir, refine);
        problem.truth = cfg.truth();
        auto train = cfg.train;
        const auto res = invert(problem, train, cfg.network ? &*cfg.network : nullptr);
        history = res.history;
        diverged = res.diverged;
        gamma = res.params.eval(cfg.grid);
        if (res.params.constant) {
            checkpoint.add("coeffs", res.params.constant->coeffs);
            std::vector<double> layout;
            for (std::size_t d : res.params.constant->nodes_per_voxel)
                layout.push_back(static_cast<double>(d));
            checkpoint.add("voxel_nodes", layout);
            checkpoint.add("bounds", {cfg.material.eps, cfg.material.upper});
        } else {
            checkpoint.add("params", res.params.network->parameters());
            checkpoint.add("latent", res.params.network->latent().data);
            std::vector<double> shape;
            for (std::size_t d : res.params.network->latent().shape)
                shape.push_back(static_cast<double>(d));
            checkpoint.add("latent_shape", shape);
        }
    }

    write_field_file(out_dir + "/gamma.fwif", gamma);
    write_blocks_file(out_dir + "/checkpoint.fwic", checkpoint);
    {
        auto os = std::ofstream(out_dir + "/history.csv");
        os << history.serialize();
    }
    if (!history.epochs.empty())
        std::printf("%s: %zu epochs, final cost %.6g, final mse %.6g\n",
                    strategy_name(cfg.train.strategy).c_str(), history.epochs.size(),
                    history.epochs.back().cost_norm, history.epochs.back().mse_norm);
    if (diverged) {
        std::fprintf(stderr, "inversion diverged (non-finite loss); partial results written\n");
        return 2;
    }
    return 0;
}

int cmd_gradcheck(const std::string& config_path, double fd_step, std::string out_dir) {
    const CaseConfig cfg = load_case_config(config_path);
    if (out_dir.empty()) out_dir = cfg.output_dir;
    ensure_dir(out_dir);

    const ScalarField truth = cfg.truth();
    // evaluation point: seeded heterogeneous gamma in [0.2, 1] so every
    // engine sees a nonzero residual
    ScalarField gamma(cfg.grid);
    {
        std::mt19937_64 rng(cfg.train.seed);
        for (double& v : gamma.values)
            v = 0.2 + 0.8 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    }
    std::vector<ShotRecord> data;
    for (const auto& src : cfg.sources)
        data.push_back(run_forward(truth, cfg.material, cfg.time, src, cfg.sensors, false).record);

    const double n_sources = static_cast<double>(cfg.sources.size());
    ScalarField kernel_grad(cfg.grid), reverse_grad(cfg.grid), fd_grad(cfg.grid);

    for (std::size_t s = 0; s < cfg.sources.size(); ++s) {
        const auto fwd =
            run_forward(gamma, cfg.material, cfg.time, cfg.sources[s], cfg.sensors, true);
        const auto res = residual_record(fwd.record, data[s]);
        const auto adj = run_adjoint(gamma, cfg.material, cfg.time, res);
        const auto nodal =
            nodal_gradient_from_kernel(frechet_kernel(*fwd.history, adj, cfg.material));
        const auto bp = backprop_through_solver(gamma, cfg.material, cfg.time, cfg.sources[s],
                                                cfg.sensors, data[s]);
        for (std::size_t i = 0; i < kernel_grad.size(); ++i) {
            kernel_grad.values[i] += nodal.values[i] / n_sources;
            reverse_grad.values[i] += bp.gradient.values[i] / n_sources;
        }
    }

    auto loss_at = [&](const ScalarField& field) {
        double acc = 0.0;
        for (std::size_t s = 0; s < cfg.sources.size(); ++s) {
            const auto r =
                run_forward(field, cfg.material, cfg.time, cfg.sources[s], cfg.sensors, false);
            acc += measurement_loss(r.record, data[s], cfg.time);
        }
        return acc / n_sources;
    };
    for (std::size_t i = 0; i < fd_grad.size(); ++i) {
        ScalarField gp = gamma, gm = gamma;
        gp.values[i] += fd_step;
        gm.values[i] -= fd_step;
        fd_grad.values[i] = (loss_at(gp) - loss_at(gm)) / (2.0 * fd_step);
    }

    double max_fd = 0.0;
    for (double v : fd_grad.values) max_fd = std::max(max_fd, std::abs(v));
    double rev_max_rel = 0.0;
    for (std::size_t i = 0; i < fd_grad.size(); ++i) {
        const double denom = std::max(std::abs(fd_grad.values[i]), 1e-9 * max_fd);
        if (denom == 0.0) continue;
        rev_max_rel =
            std::max(rev_max_rel, std::abs(reverse_grad.values[i] - fd_grad.values[i]) / denom);
    }
    const auto str = cfg.grid.strides();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < fd_grad.size(); ++i) {
        bool ring = false;
        for (std::size_t d = 0; d < cfg.grid.rank(); ++d) {
            const std::size_t c = (i / str[d]) % cfg.grid.dims[d];
            if (c == 0 || c == cfg.grid.dims[d] - 1) ring = true;
        }
        if (ring) continue;
        num += std::pow(kernel_grad.values[i] - fd_grad.values[i], 2);
        den += std::pow(fd_grad.values[i], 2);
    }
    const double adj_rel_l2 = den > 0.0 ? std::sqrt(num / den) : 0.0;

    // per-voxel report with the error norms as trailing comment rows
    {
        auto os = std::ofstream(out_dir + "/gradcheck.csv");
        os << "node,adjoint,reverse,fd\n";
        char buf[160];
        for (std::size_t i = 0; i < fd_grad.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", i, kernel_grad.values[i],
                          reverse_grad.values[i], fd_grad.values[i]);
            os << buf;
        }
        std::snprintf(buf, sizeof(buf), "# reverse_vs_fd_max_rel,%.17g\n", rev_max_rel);
        os << buf;
        std::snprintf(buf, sizeof(buf), "# adjoint_vs_fd_interior_rel_l2,%.17g\n", adj_rel_l2);
        os << buf;
    }

    std::printf("reverse-vs-fd max relative error: %.6e\n", rev_max_rel);
    std::printf("adjoint-vs-fd interior relative L2: %.6e\n", adj_rel_l2);
    std::printf("wrote %s/gradcheck.csv\n", out_dir.c_str());
    return 0;
}

int cmd_metrics(const std::string& field_path, const std::string& ref_path, double threshold) {
    const ScalarField a = read_field_file(field_path);
    const ScalarField b = read_field_file(ref_path);
    std::printf("mse: %.17g\n", field_mse(a, b));
    for (const auto& [name, f] : {std::pair<const char*, const ScalarField&>{"field", a},
                                  {"reference", b}}) {
        double thr = threshold;
        const auto norms = sharpness_metric(f, thr > 0.0 ? thr : 1e-300);
        if (thr <= 0.0) {
            double peak = 0.0;
            for (double v : norms.norm.values) peak = std::max(peak, v);
            thr = 0.1 * peak;
        }
        const auto s = sharpness_metric(f, thr > 0.0 ? thr : 1e-300);
        std::printf("sharpness mean (%s, threshold %.6g): %.17g%s\n", name, thr, s.mean_above,
                    s.any_above ? "" : " (no values above threshold)");
    }
    return 0;
}

int cmd_export(const std::string& field_path, const std::string& text_path,
               const std::string& vtk_path) {
    const ScalarField f = read_field_file(field_path);
    if (text_path.empty() && vtk_path.empty())
        throw ConfigError("export: choose --text and/or --vtk output paths");
    if (!text_path.empty()) {
        auto os = std::ofstream(text_path);
        write_text_matrix(os, f);
        std::printf("wrote %s\n", text_path.c_str());
    }
    if (!vtk_path.empty()) {
        auto os = std::ofstream(vtk_path);
        write_legacy_vtk(os, f, "gamma");
        std::printf("wrote %s\n", vtk_path.c_str());
    }
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"full waveform inversion toolkit for the scalar wave equation"};
    app.require_subcommand(1);

    std::string config_path, out_dir, data_dir, field_path, ref_path, text_path, vtk_path;
    std::size_t source_index = 0, stride = 0, refine = 2;
    double fd_step = 1e-4, threshold = 0.0;

    auto* fwd = app.add_subcommand("forward", "simulate one shot on the case phantom");
    fwd->add_option("config", config_path, "case configuration file")->required();
    fwd->add_option("--source", source_index, "source index");
    fwd->add_option("--stride", stride, "wavefield snapshot stride (0 = record only)");
    fwd->add_option("--out", out_dir, "output directory override");

    auto* mkd = app.add_subcommand("make-data", "write anti-inverse-crime reference records");
    mkd->add_option("config", config_path)->required();
    mkd->add_option("--refine", refine, "grid/time refinement factor (>= 1)");
    mkd->add_option("--out", out_dir);

    auto* inv = app.add_subcommand("invert", "run the configured inversion strategy");
    inv->add_option("config", config_path)->required();
    inv->add_option("--data", data_dir, "directory with shot_*.csv (default: generate)");
    inv->add_option("--refine", refine, "refinement for generated data");
    inv->add_option("--out", out_dir);

    auto* gc = app.add_subcommand("gradcheck", "compare the three gradient engines");
    gc->add_option("config", config_path)->required();
    gc->add_option("--fd-step", fd_step, "central difference step");
    gc->add_option("--out", out_dir);

    auto* met = app.add_subcommand("metrics", "mse and sharpness of two field files");
    met->add_option("field", field_path)->required();
    met->add_option("reference", ref_path)->required();
    met->add_option("--threshold", threshold, "sharpness threshold (default: 10% of peak)");

    auto* exp = app.add_subcommand("export", "convert a field file for external tools");
    exp->add_option("field", field_path)->required();
    exp->add_option("--text", text_path, "plain-text matrix output");
    exp->add_option("--vtk", vtk_path, "legacy structured-grid output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*fwd) return cmd_forward(config_path, source_index, stride, out_dir);
        if (*mkd) return cmd_make_data(config_path, refine, out_dir);
        if (*inv) return cmd_invert(config_path, data_dir, refine, out_dir);
        if (*gc) return cmd_gradcheck(config_path, fd_step, out_dir);
        if (*met) return cmd_metrics(field_path, ref_path, threshold);
        if (*exp) return cmd_export(field_path, text_path, vtk_path);
    } catch (const DivergenceError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

}  // namespace fwi
