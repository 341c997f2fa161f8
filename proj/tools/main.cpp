// trcl: verify oracles, run one experiment config, or sweep a grid of configs.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trcl/config.hpp"
#include "trcl/export.hpp"
#include "trcl/trainer.hpp"
#include "trcl/verify.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kConfigError = 2, kDiverged = 3 };

trcl::RunGroup run_group(const std::string& label, const trcl::ExperimentConfig& cfg) {
    const std::vector<trcl::TaskDataset> stream = trcl::make_task_stream(cfg.stream);
    std::vector<std::future<trcl::RunResult>> jobs;
    for (std::uint64_t seed : cfg.run.seeds) {
        jobs.push_back(std::async(std::launch::async, [&, seed] {
            return trcl::run_continual(stream, cfg.stream, cfg.run, seed);
        }));
    }
    trcl::RunGroup group{label, cfg, {}};
    for (auto& j : jobs) group.runs.push_back(j.get());
    return group;
}

bool write_group(const trcl::RunGroup& group, const fs::path& dir) {
    fs::create_directories(dir);
    bool diverged = false;
    for (const trcl::RunResult& r : group.runs) {
        const std::string stem = "seed_" + std::to_string(r.seed);
        trcl::export_results(r.log, dir / (stem + ".csv"), trcl::ExportFormat::Csv);
        trcl::write_text_file(dir / (stem + ".meta.json"), trcl::run_metadata_json(group.config, r));
        if (r.log.diverged) {
            diverged = true;
            std::fprintf(stderr, "%s seed %llu diverged: %s\n", group.label.c_str(),
                         static_cast<unsigned long long>(r.seed), r.divergence_reason.c_str());
        }
    }
    return diverged;
}

int finish(const std::vector<trcl::RunGroup>& groups, const fs::path& out) {
    bool diverged = false;
    for (const trcl::RunGroup& g : groups) diverged = write_group(g, out / g.label) || diverged;
    trcl::write_text_file(out / "summary.json", trcl::summary_json(groups));
    std::printf("wrote %s\n", (out / "summary.json").string().c_str());
    return diverged ? kDiverged : kOk;
}

int cmd_verify(const std::string& suite, std::uint64_t seed) {
    const trcl::VerifyReport report = trcl::run_verify(trcl::parse_verify_suite(suite), seed);
    std::fputs(report.to_text().c_str(), stdout);
    return report.passed() ? kOk : kVerifyFailed;
}

int cmd_run(const fs::path& config, const fs::path& out) {
    const trcl::ExperimentConfig cfg = trcl::load_experiment_config(config);
    return finish({run_group(trcl::to_string(cfg.run.method), cfg)}, out);
}

int cmd_sweep(const fs::path& config, const fs::path& grid, const fs::path& out) {
    const auto variants = trcl::expand_grid(trcl::read_text_file(config), trcl::read_text_file(grid));
    std::vector<trcl::RunGroup> groups;
    for (const trcl::ExperimentVariant& v : variants) {
        std::printf("[%zu/%zu] %s\n", groups.size() + 1, variants.size(), v.label.c_str());
        std::fflush(stdout);
        groups.push_back(run_group(v.label, v.config));
    }
    return finish(groups, out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trust-region continual learning toolkit"};
    app.set_version_flag("--version", std::string(trcl::library_version()));
    app.require_subcommand(1);

    std::string suite = "All";
    std::uint64_t seed = 0;
    auto* verify = app.add_subcommand("verify", "Run numeric oracle suites");
    verify->add_option("--suite", suite, "All|FisherIdentity|RankOneSquare|GradCheck|TaylorLocality|QuadEquivalence");
    verify->add_option("--seed", seed, "Random seed");

    std::string config;
    std::string grid;
    std::string out = "out";
    auto* run = app.add_subcommand("run", "Train one configuration over all its seeds");
    run->add_option("--config", config, "Experiment config (JSON)")->required();
    run->add_option("--out", out, "Output directory");

    auto* sweep = app.add_subcommand("sweep", "Train every point of a parameter grid");
    sweep->add_option("--config", config, "Base experiment config (JSON)")->required();
    sweep->add_option("--grid", grid, "Grid file: {\"dotted.path\": [values...]}")->required();
    sweep->add_option("--out", out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*verify) return cmd_verify(suite, seed);
        if (*run) return cmd_run(config, out);
        if (*sweep) return cmd_sweep(config, grid, out);
    } catch (const trcl::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kConfigError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConfigError;
    }
    return kOk;
}
