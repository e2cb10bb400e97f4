// Command-line front end: fit polynomial surrogates of pointwise-evaluable
// densities on [0,1]^d, sample the induced transport, evaluate/invert it on
// point files, and run Hellinger convergence studies.
//
// Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 I/O.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cli_config.hpp"
#include "polykr/io.hpp"
#include "polykr/metrics.hpp"
#include "polykr/parallel.hpp"

namespace cli = polykr::cli;
namespace io = polykr::io;
namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    int threads = 0;
    bool deterministic = false;
};

void apply_common(const CommonFlags& flags) {
    if (flags.threads > 0) polykr::par::set_max_threads(flags.threads);
    // reductions are always run in a fixed order, so --deterministic is
    // honored by construction
}

cli::RunConfig load_run_config(const CommonFlags& flags) {
    if (flags.config_path.empty()) throw polykr::config_error("missing --config");
    auto cfg = cli::parse_config(cli::load_json(flags.config_path));
    if (flags.seed) {
        cfg.seed = *flags.seed;
        cfg.has_seed = true;
    }
    return cfg;
}

polykr::PolynomialSurrogate fit_surrogate(const cli::RunConfig& cfg,
                                          const polykr::DensityOracle& target,
                                          polykr::wls::Run* run_out = nullptr) {
    if (cfg.method.type == "wls") {
        if (!cfg.has_seed) throw polykr::config_error("wls fits require a seed");
        polykr::RngStream rng(cfg.seed);
        auto [g, run] = polykr::wls::fit(target, cli::make_index_set(cfg), rng,
                                         cfg.method.wls_options);
        g.info().seed = cfg.seed;
        if (run_out) *run_out = std::move(run);
        return g;
    }
    polykr::interp::InterpolationPlan plan;
    if (cfg.method.mode == "tensor") {
        plan.mode = polykr::interp::InterpolationPlan::Mode::tensor;
        if (cfg.method.degrees.empty())
            throw polykr::config_error("interp tensor mode needs method.degrees");
        if (static_cast<int>(cfg.method.degrees.size()) != cfg.target.dimension)
            throw polykr::config_error("method.degrees does not match the target dimension");
        plan.degrees = cfg.method.degrees;
    } else if (cfg.method.mode == "sparse-combination") {
        plan.mode = polykr::interp::InterpolationPlan::Mode::sparse_combination;
        plan.lambda = cli::make_index_set(cfg);
    } else if (cfg.method.mode == "sparse-mix") {
        plan.mode = polykr::interp::InterpolationPlan::Mode::sparse_mix;
        plan.dim = cfg.target.dimension;
        plan.level = cfg.method.level;
    } else {
        throw polykr::config_error("unknown interpolation mode '" + cfg.method.mode + "'");
    }
    return polykr::interp::fit(target, plan);
}

int cmd_fit(const CommonFlags& flags) {
    const auto cfg = load_run_config(flags);
    const std::string out =
        !flags.out_path.empty() ? flags.out_path : cfg.out_surrogate;
    if (out.empty()) throw polykr::config_error("fit: no output path (--out or output.surrogate)");

    const auto target = cli::make_target(cfg.target);
    const auto g = fit_surrogate(cfg, *target);
    io::save_surrogate(g, out);
    cli::write_effective_config(
        cli::effective_config(cfg, polykr::par::max_threads(), flags.deterministic,
                              target.get()),
        out);
    std::printf("fit: |Lambda|=%zu n=%ld rounds=%d mass=%s -> %s\n", g.size(),
                g.info().evaluations, g.info().rounds,
                io::format_double(g.mass()).c_str(), out.c_str());
    return 0;
}

// --iterations wins; otherwise a smoothness hint picks the depth matching
// the surrogate error, and 48 is the FP-limited fallback
int resolve_iterations(const std::optional<int>& iterations,
                       const std::optional<polykr::SmoothnessHint>& hint,
                       const polykr::PolynomialSurrogate& g) {
    if (iterations) {
        if (*iterations < 1) throw polykr::config_error("iterations must be >= 1");
        return *iterations;
    }
    return polykr::default_bisection_iters(hint, g.size(), g.dimension());
}

int cmd_sample(const std::string& surrogate_path, std::size_t count,
               const std::optional<int>& iterations_flag,
               const std::optional<polykr::SmoothnessHint>& hint, std::uint64_t seed,
               const CommonFlags& flags) {
    if (flags.out_path.empty()) throw polykr::config_error("sample: missing --out");
    const auto g = io::load_surrogate(surrogate_path);
    const polykr::TriangularTransport transport(g);
    const int iterations = resolve_iterations(iterations_flag, hint, g);
    const auto points = transport.sample(count, iterations, seed);
    io::write_points_csv(flags.out_path, points, count, g.dimension());

    cli::json meta;
    meta["command"] = "sample";
    meta["surrogate"] = surrogate_path;
    meta["count"] = count;
    meta["iterations"] = iterations;
    meta["seed"] = seed;
    meta["threads"] = polykr::par::max_threads();
    meta["deterministic"] = flags.deterministic;
    cli::write_effective_config(meta, flags.out_path);
    std::printf("sample: %zu points -> %s\n", count, flags.out_path.c_str());
    return 0;
}

int cmd_invert(const std::string& surrogate_path, const std::string& points_path,
               const std::string& direction, const std::optional<int>& iterations_flag,
               const std::optional<polykr::SmoothnessHint>& hint, const CommonFlags& flags) {
    if (flags.out_path.empty()) throw polykr::config_error("invert: missing --out");
    if (direction != "S" && direction != "T")
        throw polykr::config_error("invert: direction must be S or T");
    const auto g = io::load_surrogate(surrogate_path);
    const polykr::TriangularTransport transport(g);
    const int iterations = resolve_iterations(iterations_flag, hint, g);
    const auto file = io::read_points_csv(points_path);
    if (file.dim != g.dimension())
        throw polykr::config_error("invert: point dimension does not match the surrogate");

    for (std::size_t i = 0; i < file.count; ++i)
        for (int j = 0; j < file.dim; ++j) {
            const double v = file.values[i * file.dim + j];
            if (!(v >= 0.0 && v <= 1.0))
                throw polykr::numeric_error("invert: row " + std::to_string(i + 1) +
                                            " is outside [0,1]^d");
        }

    std::vector<double> out(file.values.size());
    polykr::par::parallel_for_chunks(file.count, [&](std::size_t begin, std::size_t end) {
        auto ws = transport.make_workspace();
        for (std::size_t i = begin; i < end; ++i) {
            const std::span<const double> x(file.values.data() + i * file.dim, file.dim);
            const std::span<double> y(out.data() + i * file.dim, file.dim);
            if (direction == "S")
                transport.rosenblatt(x, y, ws);
            else
                transport.inverse_rosenblatt(x, y, iterations, ws);
        }
    });
    io::write_points_csv(flags.out_path, out, file.count, file.dim);
    std::printf("invert: %zu points through %s -> %s\n", file.count, direction.c_str(),
                flags.out_path.c_str());
    return 0;
}

int cmd_convergence(const CommonFlags& flags) {
    const auto cfg = load_run_config(flags);
    const std::string out = !flags.out_path.empty() ? flags.out_path : cfg.out_study;
    if (out.empty())
        throw polykr::config_error("convergence: no output path (--out or output.study)");
    if (cfg.levels.empty()) throw polykr::config_error("convergence: config needs 'levels'");
    if (!cfg.has_seed) throw polykr::config_error("convergence: config needs 'seed'");

    const auto target = cli::make_target(cfg.target);
    polykr::metrics::StudyOptions options;
    options.weights = cfg.index_set.weights;
    if (options.weights.empty()) options.weights.assign(cfg.target.dimension, 1.0);
    options.levels = cfg.levels;
    options.method = cfg.method.type;
    options.wls_options = cfg.method.wls_options;
    options.mc_points = cfg.quadrature.mc_points;

    polykr::RngStream rng(cfg.seed);
    const auto record = polykr::metrics::convergence_study(*target, options, rng);
    io::write_convergence_csv(out, record);
    cli::write_effective_config(
        cli::effective_config(cfg, polykr::par::max_threads(), flags.deterministic,
                              target.get()),
        out);

    for (const auto& row : record) {
        if (row.failed) {
            std::printf("level |Lambda|=%zu: failed\n", row.cardinality);
        } else if (row.hellinger_se) {
            std::printf("level |Lambda|=%zu: n=%ld hellinger=%.6g (se %.2g) %.2fs\n",
                        row.cardinality, row.evaluations, row.hellinger,
                        *row.hellinger_se, row.seconds);
        } else {
            std::printf("level |Lambda|=%zu: n=%ld hellinger=%.6g %.2fs\n", row.cardinality,
                        row.evaluations, row.hellinger, row.seconds);
        }
    }
    std::printf("convergence: %zu rows -> %s\n", record.size(), out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Triangular transport sampling from polynomial density surrogates"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string surrogate_path, points_path, direction = "S";
    std::size_t sample_count = 0;
    int iterations_value = 48;
    double hint_k = 0.0, hint_alpha = 0.0;
    std::uint64_t sample_seed = 0;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", flags.out_path, "output path");
        cmd->add_option("--threads", flags.threads, "worker thread cap");
        cmd->add_flag("--deterministic", flags.deterministic,
                      "deterministic parallel reductions (always on)");
    };

    auto* fit = app.add_subcommand("fit", "fit a density surrogate");
    fit->add_option("--config", flags.config_path, "run configuration (JSON)")->required();
    std::uint64_t seed_flag = 0;
    auto* fit_seed = fit->add_option("--seed", seed_flag, "override the config seed");
    add_common(fit);

    CLI::Option* sample_iters = nullptr;
    CLI::Option* sample_hint = nullptr;
    auto* sample = app.add_subcommand("sample", "draw pushforward samples");
    sample->add_option("--surrogate", surrogate_path, "surrogate file")->required();
    sample->add_option("--count", sample_count, "number of samples")->required();
    sample_iters = sample->add_option("--iterations", iterations_value, "bisection iterations");
    sample_hint = sample->add_option("--smoothness-k", hint_k,
                                     "smoothness hint k (derives the bisection depth)");
    sample->add_option("--smoothness-alpha", hint_alpha, "smoothness hint alpha");
    sample->add_option("--seed", sample_seed, "sampling seed")->required();
    add_common(sample);

    CLI::Option* invert_iters = nullptr;
    CLI::Option* invert_hint = nullptr;
    auto* invert = app.add_subcommand("invert", "map a point file through S or T");
    invert->add_option("--surrogate", surrogate_path, "surrogate file")->required();
    invert->add_option("--points", points_path, "input points CSV")->required();
    invert->add_option("--direction", direction, "S (forward) or T (inverse)");
    invert_iters =
        invert->add_option("--iterations", iterations_value, "bisection iterations (direction T)");
    invert_hint = invert->add_option("--smoothness-k", hint_k,
                                     "smoothness hint k (derives the bisection depth)");
    invert->add_option("--smoothness-alpha", hint_alpha, "smoothness hint alpha");
    add_common(invert);

    auto* convergence = app.add_subcommand("convergence", "run a convergence study");
    convergence->add_option("--config", flags.config_path, "run configuration (JSON)")
        ->required();
    auto* conv_seed = convergence->add_option("--seed", seed_flag, "override the config seed");
    add_common(convergence);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (fit_seed->count() || conv_seed->count()) flags.seed = seed_flag;
        apply_common(flags);
        if (app.got_subcommand(fit)) return cmd_fit(flags);
        if (app.got_subcommand(sample)) {
            std::optional<int> iters;
            if (sample_iters->count()) iters = iterations_value;
            std::optional<polykr::SmoothnessHint> hint;
            if (sample_hint->count()) hint = polykr::SmoothnessHint{hint_k, hint_alpha};
            return cmd_sample(surrogate_path, sample_count, iters, hint, sample_seed, flags);
        }
        if (app.got_subcommand(invert)) {
            std::optional<int> iters;
            if (invert_iters->count()) iters = iterations_value;
            std::optional<polykr::SmoothnessHint> hint;
            if (invert_hint->count()) hint = polykr::SmoothnessHint{hint_k, hint_alpha};
            return cmd_invert(surrogate_path, points_path, direction, iters, hint, flags);
        }
        if (app.got_subcommand(convergence)) return cmd_convergence(flags);
        return 2;
    } catch (const polykr::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const polykr::io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const polykr::numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
