// SPDX-License-Identifier: Apache-2.0
// Command-line driver: runs experiment presets and writes CSV tables with JSON sidecars.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "risntn/config.hpp"
#include "risntn/experiments.hpp"

namespace {

int report_error(const risntn::Error& e) {
    nlohmann::json rec{{"error", {{"kind", e.kind()}, {"message", e.what()}}}};
    if (const auto* pe = dynamic_cast<const risntn::ParseError*>(&e)) {
        rec["error"]["line"] = pe->line();
        rec["error"]["field"] = pe->field();
    }
    if (const auto* ve = dynamic_cast<const risntn::ValidationError*>(&e)) rec["error"]["violations"] = ve->violations();
    std::cerr << rec.dump() << '\n';
    return 1;
}

unsigned resolve_jobs(std::optional<unsigned> flag) {
    if (flag && *flag > 0) return *flag;
    if (const char* env = std::getenv("RIS_SIM_JOBS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (...) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void run_one(const risntn::PresetEntry& e, const risntn::ExperimentConfig& cfg, const risntn::RunOptions& opt,
             const std::filesystem::path& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const risntn::PresetResult r = e.fn(cfg, opt);
    const auto files = risntn::write_preset(r, cfg, out);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::size_t rows = 0;
    for (const auto& t : r.tables) rows += t.rows.size();
    std::cout << e.name << ": " << rows << " rows, " << files.size() << " files in " << out.string() << " ("
              << std::fixed << std::setprecision(2) << secs << " s)\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo simulator for RIS-assisted LEO downlink communication and positioning"};
    app.require_subcommand(1);

    std::string config_path, codebook_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> jobs;
    app.add_option("--config", config_path, "JSON config file (missing keys take defaults)");
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "master seed, overrides the config");
    app.add_option("--jobs", jobs, "worker threads (fallback: RIS_SIM_JOBS, then hardware threads)");
    app.add_option("--codebook", codebook_path, "load the codebook from a JSON file instead of building it");

    std::string chosen;
    for (const auto& e : risntn::presets())
        app.add_subcommand(e.name, std::string("run the ") + e.name + " preset")->callback([&chosen, n = e.name] {
            chosen = n;
        });
    app.add_subcommand("run-all", "run every preset")->callback([&] { chosen = "run-all"; });
    app.add_subcommand("export-codebook", "write the codebook for the configured N and b")->callback([&] {
        chosen = "export-codebook";
    });
    app.add_subcommand("print-config", "print the effective configuration")->callback([&] { chosen = "print-config"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        risntn::ExperimentConfig cfg = config_path.empty() ? risntn::ExperimentConfig{} : risntn::load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (!codebook_path.empty()) cfg.codebook_file = codebook_path;
        risntn::validate_config(cfg);
        const risntn::RunOptions opt{resolve_jobs(jobs)};
        const std::filesystem::path out(out_dir);

        if (chosen == "print-config") {
            std::cout << risntn::serialize_config(cfg);
        } else if (chosen == "export-codebook") {
            const risntn::Prepared p = risntn::prepare(cfg);
            std::filesystem::create_directories(out);
            const auto path = out / "codebook.json";
            risntn::save_codebook(p.cb, path.string());
            std::cout << "export-codebook: N=" << p.cb.n_elements << " b=" << p.cb.bits << " M=" << p.cb.size()
                      << " -> " << path.string() << '\n';
        } else {
            for (const auto& e : risntn::presets())
                if (chosen == "run-all" || chosen == e.name) run_one(e, cfg, opt, out);
        }
    } catch (const risntn::Error& e) {
        return report_error(e);
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", {{"kind", "Internal"}, {"message", e.what()}}}}.dump() << '\n';
        return 1;
    }
    return 0;
}
