#pragma once

// Run configuration for the command-line front end: JSON in, validated
// struct out, and an "effective" echo with every defaulted field
// materialized so a run can be reproduced from its persisted config alone.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "polykr/errors.hpp"
#include "polykr/external_oracle.hpp"
#include "polykr/interpolation.hpp"
#include "polykr/multi_index.hpp"
#include "polykr/oracle.hpp"
#include "polykr/targets.hpp"
#include "polykr/transport.hpp"
#include "polykr/wls.hpp"

namespace polykr::cli {

using json = nlohmann::ordered_json;

struct TargetConfig {
    std::string name;  // uniform | rosenbrock | deconvolution | external
    int dimension = 0;
    targets::RosenbrockParams rosenbrock;
    targets::DeconvolutionSpec deconvolution;
    std::uint64_t deconvolution_seed = 0;
    std::string external_command;
};

struct MethodConfig {
    std::string type = "wls";  // wls | interp
    std::string mode = "sparse-combination";  // interp only
    std::vector<int> degrees;                 // interp tensor
    int level = 0;                            // interp sparse-mix
    wls::Options wls_options;
};

struct IndexSetConfig {
    std::vector<double> weights;
    double level = 0.0;
    std::string file;
};

struct BisectionConfig {
    std::optional<int> iterations;
    std::optional<SmoothnessHint> smoothness;
};

struct QuadratureConfig {
    std::size_t mc_points = 100000;
};

struct RunConfig {
    TargetConfig target;
    MethodConfig method;
    IndexSetConfig index_set;
    std::vector<double> levels;  // convergence only
    std::uint64_t seed = 0;
    bool has_seed = false;
    BisectionConfig bisection;
    QuadratureConfig quadrature;
    std::string out_surrogate;
    std::string out_samples;
    std::string out_study;
};

inline json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config: " + path.string());
    try {
        return json::parse(in);
    } catch (const std::exception& e) {
        throw config_error("config parse error in " + path.string() + ": " + e.what());
    }
}

inline RunConfig parse_config(const json& root) {
    RunConfig cfg;
    try {
        if (!root.contains("target")) throw config_error("config: missing 'target'");
        const auto& t = root.at("target");
        cfg.target.name = t.at("name").get<std::string>();
        if (cfg.target.name == "uniform") {
            cfg.target.dimension = t.at("dimension").get<int>();
        } else if (cfg.target.name == "rosenbrock") {
            cfg.target.dimension = 2;
            auto& p = cfg.target.rosenbrock;
            p.a = t.value("a", p.a);
            p.b = t.value("b", p.b);
            p.s = t.value("s", p.s);
            p.plus_sign = t.value("plus_sign", p.plus_sign);
            if (t.contains("modes")) {
                p.modes.clear();
                for (const auto& mode : t.at("modes")) {
                    targets::RosenbrockMode m;
                    m.theta = mode.at("theta").get<double>();
                    m.center[0] = mode.at("center").at(0).get<double>();
                    m.center[1] = mode.at("center").at(1).get<double>();
                    p.modes.push_back(m);
                }
            }
        } else if (cfg.target.name == "deconvolution") {
            auto& s = cfg.target.deconvolution;
            s.max_level = t.value("max_level", s.max_level);
            s.alpha = t.value("alpha", s.alpha);
            s.sigma = t.value("sigma", s.sigma);
            s.measurements = t.value("measurements", s.measurements);
            s.kernel_decay = t.value("kernel_decay", s.kernel_decay);
            cfg.target.deconvolution_seed = t.value("seed", std::uint64_t{0});
            cfg.target.dimension = (1 << (s.max_level + 1)) - 1;
        } else if (cfg.target.name == "external") {
            cfg.target.external_command = t.at("command").get<std::string>();
            cfg.target.dimension = t.at("dimension").get<int>();
        } else {
            throw config_error("config: unknown target '" + cfg.target.name + "'");
        }

        if (root.contains("method")) {
            const auto& m = root.at("method");
            cfg.method.type = m.value("type", cfg.method.type);
            if (cfg.method.type != "wls" && cfg.method.type != "interp")
                throw config_error("config: method.type must be 'wls' or 'interp'");
            cfg.method.mode = m.value("mode", cfg.method.mode);
            if (m.contains("degrees"))
                cfg.method.degrees = m.at("degrees").get<std::vector<int>>();
            cfg.method.level = m.value("level", 0);
            if (m.contains("sample_count"))
                cfg.method.wls_options.sample_count = m.at("sample_count").get<std::size_t>();
            cfg.method.wls_options.max_rounds =
                m.value("max_rounds", cfg.method.wls_options.max_rounds);
        }

        if (root.contains("index_set")) {
            const auto& s = root.at("index_set");
            if (s.contains("weights"))
                cfg.index_set.weights = s.at("weights").get<std::vector<double>>();
            cfg.index_set.level = s.value("level", 0.0);
            cfg.index_set.file = s.value("file", std::string{});
        }

        if (root.contains("levels"))
            cfg.levels = root.at("levels").get<std::vector<double>>();

        if (root.contains("seed")) {
            cfg.seed = root.at("seed").get<std::uint64_t>();
            cfg.has_seed = true;
        }

        if (root.contains("bisection")) {
            const auto& b = root.at("bisection");
            if (b.contains("iterations")) cfg.bisection.iterations = b.at("iterations").get<int>();
            if (b.contains("smoothness")) {
                SmoothnessHint hint;
                hint.k = b.at("smoothness").at("k").get<double>();
                hint.alpha = b.at("smoothness").value("alpha", 0.0);
                cfg.bisection.smoothness = hint;
            }
        }

        if (root.contains("quadrature")) {
            cfg.quadrature.mc_points =
                root.at("quadrature").value("mc_points", cfg.quadrature.mc_points);
        }

        if (root.contains("output")) {
            const auto& o = root.at("output");
            cfg.out_surrogate = o.value("surrogate", std::string{});
            cfg.out_samples = o.value("samples", std::string{});
            cfg.out_study = o.value("study", std::string{});
        }
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    return cfg;
}

// Oracle factory. The returned target owns its state; deconvolution data
// is synthesized from the target seed.
inline std::unique_ptr<DensityOracle> make_target(const TargetConfig& cfg) {
    if (cfg.name == "uniform")
        return std::make_unique<targets::UniformTarget>(cfg.dimension);
    if (cfg.name == "rosenbrock")
        return std::make_unique<targets::RosenbrockTarget>(cfg.rosenbrock);
    if (cfg.name == "deconvolution") {
        RngStream rng(cfg.deconvolution_seed);
        return std::make_unique<targets::DeconvolutionTarget>(
            targets::DeconvolutionTarget::build(cfg.deconvolution, rng));
    }
    if (cfg.name == "external")
        return std::make_unique<ExternalOracle>(cfg.external_command, cfg.dimension);
    throw config_error("unknown target '" + cfg.name + "'");
}

inline MultiIndexSet make_index_set(const RunConfig& cfg, double level_override = 0.0) {
    if (!cfg.index_set.file.empty()) {
        std::ifstream in(cfg.index_set.file);
        if (!in) throw config_error("cannot open index set file: " + cfg.index_set.file);
        std::vector<std::vector<int>> rows;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::vector<int> row;
            int v;
            while (ss >> v) row.push_back(v);
            rows.push_back(std::move(row));
        }
        if (rows.empty()) throw config_error("empty index set file: " + cfg.index_set.file);
        auto set = MultiIndexSet::from_rows(static_cast<int>(rows[0].size()), std::move(rows));
        if (!is_downward_closed(set))
            throw config_error("index set file is not downward closed: " + cfg.index_set.file);
        return set;
    }
    std::vector<double> weights = cfg.index_set.weights;
    if (weights.empty()) weights.assign(cfg.target.dimension, 1.0);
    if (static_cast<int>(weights.size()) != cfg.target.dimension)
        throw config_error("index set weights do not match the target dimension");
    const double level = level_override > 0.0 ? level_override : cfg.index_set.level;
    if (!(level > 0.0)) throw config_error("index set level must be positive");
    return construct_anisotropic(weights, level);
}

// Echo of the configuration with all defaults resolved. For deconvolution
// targets the synthesized ground truth and data vector ride along so a run
// can be audited without re-deriving them from the seed.
inline json effective_config(const RunConfig& cfg, int threads, bool deterministic,
                             const DensityOracle* target_ptr = nullptr) {
    json root;
    json target;
    target["name"] = cfg.target.name;
    target["dimension"] = cfg.target.dimension;
    if (cfg.target.name == "rosenbrock") {
        const auto& p = cfg.target.rosenbrock;
        target["a"] = p.a;
        target["b"] = p.b;
        target["s"] = p.s;
        target["plus_sign"] = p.plus_sign;
        json modes = json::array();
        for (const auto& m : p.modes)
            modes.push_back({{"theta", m.theta}, {"center", {m.center[0], m.center[1]}}});
        target["modes"] = modes;
    } else if (cfg.target.name == "deconvolution") {
        const auto& s = cfg.target.deconvolution;
        target["max_level"] = s.max_level;
        target["alpha"] = s.alpha;
        target["sigma"] = s.sigma;
        target["measurements"] = s.measurements;
        target["kernel_decay"] = s.kernel_decay;
        target["seed"] = cfg.target.deconvolution_seed;
        if (const auto* deconv = dynamic_cast<const targets::DeconvolutionTarget*>(target_ptr)) {
            target["ground_truth"] = deconv->ground_truth();
            target["data"] = deconv->data();
        }
    } else if (cfg.target.name == "external") {
        target["command"] = cfg.target.external_command;
    }
    root["target"] = target;

    json method;
    method["type"] = cfg.method.type;
    if (cfg.method.type == "interp") {
        method["mode"] = cfg.method.mode;
        if (!cfg.method.degrees.empty()) method["degrees"] = cfg.method.degrees;
        if (cfg.method.mode == "sparse-mix") method["level"] = cfg.method.level;
    } else {
        if (cfg.method.wls_options.sample_count)
            method["sample_count"] = *cfg.method.wls_options.sample_count;
        method["max_rounds"] = cfg.method.wls_options.max_rounds;
    }
    root["method"] = method;

    json index_set;
    if (!cfg.index_set.file.empty()) {
        index_set["file"] = cfg.index_set.file;
    } else {
        std::vector<double> weights = cfg.index_set.weights;
        if (weights.empty()) weights.assign(cfg.target.dimension, 1.0);
        index_set["weights"] = weights;
        if (cfg.index_set.level > 0.0) index_set["level"] = cfg.index_set.level;
    }
    root["index_set"] = index_set;
    if (!cfg.levels.empty()) root["levels"] = cfg.levels;
    if (cfg.has_seed) root["seed"] = cfg.seed;

    json bisection;
    if (cfg.bisection.smoothness) {
        bisection["smoothness"] = {{"k", cfg.bisection.smoothness->k},
                                   {"alpha", cfg.bisection.smoothness->alpha}};
    } else {
        bisection["iterations"] = cfg.bisection.iterations.value_or(48);
    }
    root["bisection"] = bisection;
    root["quadrature"] = {{"mc_points", cfg.quadrature.mc_points}};
    root["threads"] = threads;
    root["deterministic"] = deterministic;
    return root;
}

inline void write_effective_config(const json& effective, const std::filesystem::path& next_to) {
    const auto path = next_to.string() + ".config.json";
    std::ofstream out(path);
    if (!out) throw io_error("cannot write effective config: " + path);
    out << effective.dump(2) << "\n";
}

}  // namespace polykr::cli
