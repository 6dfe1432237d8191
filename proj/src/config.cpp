#include "fwi/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace fwi {

namespace {

struct Section {
    std::string name;
    std::map<std::string, std::string> entries;
    std::set<std::string> consumed;

    bool has(const std::string& key) const { return entries.count(key) > 0; }

    std::string take(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end())
            throw ConfigError("[" + name + "] missing key '" + key + "'");
        consumed.insert(key);
        return it->second;
    }

    std::optional<std::string> take_opt(const std::string& key) {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        consumed.insert(key);
        return it->second;
    }

    void reject_unknown() const {
        for (const auto& [key, value] : entries)
            if (!consumed.count(key))
                throw ConfigError("unknown key '" + key + "' in section [" + name + "]");
    }
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_number(const Section& sec, const std::string& key, const std::string& text) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "' in [" + sec.name + "]: expected a number, got '" +
                          text + "'");
    }
    if (pos != text.size())
        throw ConfigError("key '" + key + "' in [" + sec.name + "]: trailing characters in '" +
                          text + "'");
    return v;
}

double number(Section& sec, const std::string& key) {
    return parse_number(sec, key, sec.take(key));
}

std::vector<double> number_list(Section& sec, const std::string& key) {
    std::stringstream ss(sec.take(key));
    std::vector<double> out;
    std::string tok;
    while (ss >> tok) out.push_back(parse_number(sec, key, tok));
    if (out.empty()) throw ConfigError("key '" + key + "' in [" + sec.name + "]: empty list");
    return out;
}

std::vector<std::size_t> index_list(Section& sec, const std::string& key) {
    std::vector<std::size_t> out;
    for (double v : number_list(sec, key)) {
        if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v)))
            throw ConfigError("key '" + key + "' in [" + sec.name +
                              "]: expected non-negative integers");
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

bool flag(Section& sec, const std::string& key, bool fallback) {
    const auto text = sec.take_opt(key);
    if (!text) return fallback;
    if (*text == "on" || *text == "true" || *text == "1") return true;
    if (*text == "off" || *text == "false" || *text == "0") return false;
    throw ConfigError("key '" + key + "' in [" + sec.name + "]: expected on/off");
}

}  // namespace

ScalarField CaseConfig::truth() const { return build_phantom(voids, grid, material.eps); }

CaseConfig parse_case_config(std::istream& is) {
    std::vector<Section> sections;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            sections.push_back(Section{trim(line.substr(1, line.size() - 2)), {}, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        if (sections.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": key outside any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!sections.back().entries.emplace(key, value).second)
            throw ConfigError("duplicate key '" + key + "' in section [" + sections.back().name +
                              "]");
    }

    const std::set<std::string> known{"grid",   "material", "time",   "source", "sensors",
                                      "void",   "train",    "network", "output"};
    for (const auto& sec : sections)
        if (!known.count(sec.name))
            throw ConfigError("unknown section [" + sec.name + "]");

    auto find_one = [&](const std::string& name, bool required) -> Section* {
        Section* found = nullptr;
        for (auto& sec : sections)
            if (sec.name == name) {
                if (found) throw ConfigError("section [" + name + "] may appear only once");
                found = &sec;
            }
        if (!found && required) throw ConfigError("missing section [" + name + "]");
        return found;
    };

    CaseConfig cfg;

    {
        Section& sec = *find_one("grid", true);
        const auto dims = index_list(sec, "dims");
        const auto extent = number_list(sec, "extent");
        int ghosts = 2;
        if (auto g = sec.take_opt("ghost_layers"))
            ghosts = static_cast<int>(parse_number(sec, "ghost_layers", *g));
        try {
            cfg.grid = make_grid(dims, extent, ghosts);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("section [grid]: " + std::string(e.what()));
        }
        sec.reject_unknown();
    }
    {
        Section& sec = *find_one("material", true);
        cfg.material.rho0 = number(sec, "rho0");
        cfg.material.c0 = number(sec, "c0");
        cfg.material.eps = number(sec, "eps");
        cfg.material.upper = number(sec, "upper");
        try {
            cfg.material.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("section [material]: " + std::string(e.what()));
        }
        sec.reject_unknown();
    }
    {
        Section& sec = *find_one("time", true);
        cfg.time.dt = number(sec, "dt");
        const double steps = number(sec, "n_steps");
        if (steps < 1.0 || steps != std::floor(steps))
            throw ConfigError("key 'n_steps' in [time]: expected a positive integer");
        cfg.time.n_steps = static_cast<std::size_t>(steps);
        try {
            cfg.time.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("section [time]: " + std::string(e.what()));
        }
        sec.reject_unknown();
    }
    for (auto& sec : sections) {
        if (sec.name != "source") continue;
        SourceSpec src;
        src.position = index_list(sec, "position");
        src.amplitude = number(sec, "amplitude");
        src.frequency = number(sec, "frequency");
        const double cycles = number(sec, "cycles");
        if (cycles < 1.0 || cycles != std::floor(cycles))
            throw ConfigError("key 'cycles' in [source]: expected a positive integer");
        src.cycles = static_cast<int>(cycles);
        try {
            src.validate(cfg.grid);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("section [source]: " + std::string(e.what()));
        }
        cfg.sources.push_back(src);
        sec.reject_unknown();
    }
    if (cfg.sources.empty()) throw ConfigError("missing section [source]");
    {
        Section& sec = *find_one("sensors", true);
        std::stringstream ss(sec.take("positions"));
        std::string group;
        while (std::getline(ss, group, ';')) {
            group = trim(group);
            if (group.empty()) continue;
            std::stringstream gs(group);
            std::vector<std::size_t> pos;
            std::string tok;
            while (gs >> tok) {
                const double v = parse_number(sec, "positions", tok);
                if (v < 0.0 || v != std::floor(v))
                    throw ConfigError("key 'positions' in [sensors]: expected node indices");
                pos.push_back(static_cast<std::size_t>(v));
            }
            cfg.sensors.positions.push_back(pos);
        }
        try {
            cfg.sensors.validate(cfg.grid);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("section [sensors]: " + std::string(e.what()));
        }
        sec.reject_unknown();
    }
    for (auto& sec : sections) {
        if (sec.name != "void") continue;
        VoidShape v;
        const std::string shape = sec.take("shape");
        if (shape == "circle" || shape == "sphere") {
            v.kind = VoidShape::Kind::Ball;
            v.center = number_list(sec, "center");
            v.radius = number(sec, "radius");
        } else if (shape == "box") {
            v.kind = VoidShape::Kind::Box;
            v.lo = number_list(sec, "min_corner");
            v.hi = number_list(sec, "max_corner");
        } else {
            throw ConfigError("key 'shape' in [void]: expected circle, sphere or box");
        }
        try {
            v.validate(cfg.grid);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("section [void]: " + std::string(e.what()));
        }
        cfg.voids.push_back(v);
        sec.reject_unknown();
    }
    {
        Section& sec = *find_one("train", true);
        cfg.train.strategy = strategy_from_name(sec.take("strategy"));
        const double epochs = number(sec, "epochs");
        if (epochs < 1.0 || epochs != std::floor(epochs))
            throw ConfigError("key 'epochs' in [train]: expected a positive integer");
        cfg.train.epochs = static_cast<std::size_t>(epochs);
        cfg.train.lr = number(sec, "lr");
        if (auto v = sec.take_opt("lr_max"))
            cfg.train.lr_max = parse_number(sec, "lr_max", *v);
        if (auto v = sec.take_opt("decay_a"))
            cfg.train.decay_a = parse_number(sec, "decay_a", *v);
        if (auto v = sec.take_opt("decay_b"))
            cfg.train.decay_b = parse_number(sec, "decay_b", *v);
        if (auto v = sec.take_opt("clip_threshold"))
            cfg.train.clip_threshold = parse_number(sec, "clip_threshold", *v);
        if (auto v = sec.take_opt("seed"))
            cfg.train.seed = static_cast<std::uint64_t>(parse_number(sec, "seed", *v));
        cfg.train.trapezoid_loss = flag(sec, "trapezoid", false);
        if (sec.has("voxel_nodes")) cfg.train.voxel_nodes = index_list(sec, "voxel_nodes");
        try {
            cfg.train.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("section [train]: " + std::string(e.what()));
        }
        sec.reject_unknown();
    }
    if (Section* sec = find_one("network", false)) {
        GeneratorConfig net;
        const std::size_t channels =
            static_cast<std::size_t>(number(*sec, "latent_channels"));
        const auto spatial = index_list(*sec, "latent_dims");
        net.latent_shape = {channels};
        net.latent_shape.insert(net.latent_shape.end(), spatial.begin(), spatial.end());
        std::stringstream bs(sec->take("blocks"));
        std::string group;
        while (std::getline(bs, group, ';')) {
            group = trim(group);
            if (group.empty()) continue;
            std::stringstream gs(group);
            std::size_t c1 = 0, c2 = 0;
            if (!(gs >> c1 >> c2))
                throw ConfigError("key 'blocks' in [network]: expected 'c1 c2; c1 c2; ...'");
            net.blocks.emplace_back(c1, c2);
        }
        net.output_dims = cfg.grid.dims;
        net.eps = cfg.material.eps;
        net.pixel_norm = flag(*sec, "pixel_norm", cfg.grid.rank() == 3);
        try {
            net.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("section [network]: " + std::string(e.what()));
        }
        cfg.network = net;
        sec->reject_unknown();
    }
    if (Section* sec = find_one("output", false)) {
        cfg.output_dir = sec->take("directory");
        sec->reject_unknown();
    }

    const bool needs_network = cfg.train.strategy != Strategy::AdjointConstant;
    if (needs_network && !cfg.network)
        throw ConfigError("strategy '" + strategy_name(cfg.train.strategy) +
                          "' requires a [network] section");
    if (!cfg.train.voxel_nodes.empty()) {
        if (cfg.train.voxel_nodes.size() != cfg.grid.rank())
            throw ConfigError("key 'voxel_nodes' in [train]: rank mismatch with the grid");
        for (std::size_t d = 0; d < cfg.grid.rank(); ++d)
            if (cfg.train.voxel_nodes[d] == 0 || cfg.grid.dims[d] % cfg.train.voxel_nodes[d] != 0)
                throw ConfigError("key 'voxel_nodes' in [train]: must tile the grid exactly");
    }
    return cfg;
}

CaseConfig load_case_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open '" + path + "'");
    return parse_case_config(is);
}

}  // namespace fwi
