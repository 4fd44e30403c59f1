#include "shellvk/harness.hpp"
#include "shellvk/parallel.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

// Exit-code contract: 0 success, 1 config error, 2 solver error,
// 3 acceptance-check failure.
int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const shellvk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const shellvk::InputError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    }
}

shellvk::ExperimentConfig
make_config(const std::string& scenario, const std::string& config_path,
            const std::vector<std::string>& overrides, const std::string& outdir, int jobs,
            int threads) {
    using namespace shellvk;
    ExperimentConfig c;
    if (!scenario.empty() && !config_path.empty())
        throw ConfigError("give either --scenario or --config, not both");
    if (!scenario.empty()) {
        std::map<std::string, std::string> entries;
        for (const std::string& ov : overrides) {
            const auto eq = ov.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got: " + ov);
            entries[ov.substr(0, eq)] = ov.substr(eq + 1);
        }
        c = config_from_entries(entries, scenario_config(scenario));
    } else {
        c = load_config(config_path, overrides);
    }
    if (!outdir.empty()) c.output_dir = outdir;
    if (jobs > 0) c.jobs = jobs;
    if (threads > 0) c.threads = threads;
    if (c.threads > 0) set_num_threads(c.threads);
    c.validate();
    return c;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"shellvk: thin-shell elastodynamics and its von Karman limit"};
    app.require_subcommand(1);

    std::string config_path, scenario, outdir;
    std::vector<std::string> overrides;
    int jobs = 0, threads = 0;
    std::uint64_t seed = 12345;
    bool inject_bad = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "TOML config file");
        sub->add_option("--scenario", scenario,
                        "named scenario: plate-linear, plate-vk, cylinder-vk, sphere-vk");
        sub->add_option("--set", overrides, "override config entries, section.key=value");
        sub->add_option("--out", outdir, "output directory (SHELLVK_OUT overrides)");
        sub->add_option("--jobs", jobs, "concurrent per-thickness runs in sweep");
        sub->add_option("--threads", threads, "OpenMP thread count (0: library default)");
    };

    CLI::App* s3 = app.add_subcommand("simulate3d", "integrate the rescaled 3D shell dynamics");
    add_common(s3);
    CLI::App* s2 = app.add_subcommand("simulate2d", "integrate the limit von Karman dynamics");
    add_common(s2);
    CLI::App* ssw = app.add_subcommand("sweep", "thickness sweep with convergence report");
    add_common(ssw);
    CLI::App* sst = app.add_subcommand("selftest", "run the module invariant suites");
    sst->add_option("--seed", seed, "random seed");
    sst->add_flag("--inject-bad-material", inject_bad,
                  "corrupt a material fixture to exercise the failure path");

    CLI11_PARSE(app, argc, argv);

    if (sst->parsed()) {
        shellvk::SelftestResult r = shellvk::run_selftest(seed, inject_bad);
        std::cout << "suite,name,status,detail\n" << r.table;
        std::cout << "SELFTEST_RESULT," << (r.all_pass ? "PASS" : "FAIL") << "\n";
        return r.all_pass ? 0 : 3;
    }

    return run_guarded([&] {
        const shellvk::ExperimentConfig c =
            make_config(scenario, config_path, overrides, outdir, jobs, threads);
        shellvk::RunArtifacts a;
        if (s3->parsed()) a = shellvk::cli_simulate3d(c);
        if (s2->parsed()) a = shellvk::cli_simulate2d(c);
        if (ssw->parsed()) a = shellvk::cli_sweep(c);
        for (const std::string& p : a.written_paths) std::cout << p << "\n";
    });
}
