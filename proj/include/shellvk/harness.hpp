#ifndef SHELLVK_HARNESS_HPP
#define SHELLVK_HARNESS_HPP

#include "shellvk/config.hpp"
#include "shellvk/reduction.hpp"
#include "shellvk/solver2d.hpp"
#include "shellvk/solver3d.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace shellvk {

inline constexpr const char* kVersion = "shellvk 0.1.0";

/// Output files of a run: name -> content, produced deterministically in
/// memory and then written below the output directory.
struct RunArtifacts {
    std::map<std::string, std::string> files; // relative name -> content
    std::string summary_name;
    std::vector<std::string> written_paths;
};

std::string resolve_outdir(const ExperimentConfig& c);
void write_artifacts(RunArtifacts& a, const std::string& outdir);

struct Sim3DResult {
    RunArtifacts artifacts;
    std::shared_ptr<ShellMesh> mesh;
    std::shared_ptr<Solver3D> solver;
    std::vector<State3D> snapshots; // at sample times
    Real sup_energy_ratio = 0;
    Real max_slack = 0;
    bool energy_flagged = false;
    int newton_total = 0;
};

struct Sim2DResult {
    RunArtifacts artifacts;
    std::shared_ptr<Solver2D> solver;
    std::vector<State2D> snapshots;
};

/// Integrates the 3D solver over (0, t_end), recording the per-step energy
/// ledger and snapshot diagnostics at the configured sample times.
Sim3DResult simulate3d(const ExperimentConfig& c, Real h,
                       std::shared_ptr<ShellMesh> mesh = nullptr);

/// Integrates the limit system, recording norms, the limit energy, the
/// isometry-constraint residual and the membrane stationarity residual.
Sim2DResult simulate2d(const ExperimentConfig& c);

struct SweepResult {
    RunArtifacts artifacts;
    ConvergenceReport report;
    bool complete = true;
};

/// Runs the 2D reference once and the 3D solver for every h in h_list with
/// initial data matched through the scaled-average/velocity limits, then
/// assembles the cross-thickness convergence report.
SweepResult run_sweep(const ExperimentConfig& c);

struct SelftestResult {
    std::string table; // machine-readable lines: suite,name,status,detail
    bool all_pass = true;
};

/// Executes the invariant suites of all modules. `inject_bad_material`
/// corrupts a test fixture (lambda < 0) to exercise the failure path.
SelftestResult run_selftest(std::uint64_t seed, bool inject_bad_material = false);

/// Convenience wrappers used by the CLI: run + write artifacts.
RunArtifacts cli_simulate3d(const ExperimentConfig& c);
RunArtifacts cli_simulate2d(const ExperimentConfig& c);
RunArtifacts cli_sweep(const ExperimentConfig& c);

} // namespace shellvk

#endif
