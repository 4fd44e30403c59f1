#ifndef SHELLVK_CONFIG_HPP
#define SHELLVK_CONFIG_HPP

#include "shellvk/chart.hpp"
#include "shellvk/fields.hpp"
#include "shellvk/material.hpp"
#include "shellvk/scaling.hpp"
#include "shellvk/solver2d.hpp"
#include "shellvk/solver3d.hpp"
#include "shellvk/types.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace shellvk {

using Json = nlohmann::ordered_json;

/// Full experiment description. Parsed from a TOML config file (sections of
/// key = value scalars/arrays), overridable with --set section.key=value,
/// echoed into every summary JSON and re-parseable from it.
struct ExperimentConfig {
    std::string scenario = "custom";

    // chart
    std::string chart_kind = "plate";
    Real lx = 1.0, ly = 1.0;
    Real radius = 1.0, angle = 1.0, length = 1.0, half_width = 0.5;
    int orientation = +1;

    // material
    Real mu = 1.0, lambda = 1.0;

    // scaling
    std::string scaling_rule = "kappa_h4";
    Real kappa = 1.0, beta = 5.0;
    Real h = 0.05, h0 = 0.2;
    std::vector<Real> h_list = {0.1, 0.05, 0.025};

    // grid
    int n1 = 8, n2 = 8, ns = 3, nq = 2, nq2d = 3;

    // time
    Real dt = 1e-3, t_end = 0.2;
    std::vector<Real> sample_times = {0.0, 0.1, 0.2};

    // forcing
    std::string forcing_profile = "zero";
    Real forcing_amp = 0.0, forcing_omega = 0.0;
    bool forcing_zero_mean = true;

    // initial data
    std::string bending_profile = "normal_bump";
    Real bending_amp = 0.5;
    std::string velocity_profile = "normal_bump";
    Real velocity_amp = 0.3;
    std::string membrane_profile = "inplane_bump";
    Real membrane_amp = 0.4;
    bool with_relaxation = true;
    bool projected_init = false;
    Real eps_proj = 1e-6;

    // tolerances
    Real tol_energy_rel = 1e-8;
    Real tol_B = 1e-9;
    Real eps_iso = 1e-6;
    Real newton_tol = 1e-10;
    Real newton_tol_rel = 1e-12;
    int newton_max_iter = 30;

    // run control
    std::string output_dir = "out";
    std::uint64_t seed = 12345;
    int jobs = 1;
    int threads = 0;
    std::string exec = "parallel";

    void validate() const;

    Chart make_chart() const;
    MaterialModel make_material() const;
    ScalingLaw make_scaling(Real h_value) const;
    Forcing make_forcing() const;
    InitialData3D make_initial3d() const;
    Real limit_kappa() const { return scaling_rule == "kappa_h4" ? kappa : 0.0; }
    Exec make_exec() const { return exec == "serial" ? Exec::Serial : Exec::Parallel; }
    Solver3DOptions make_solver3d_options(Real e0_scale = -1) const;
    Solver2DOptions make_solver2d_options() const;

    Json to_json() const;
    static ExperimentConfig from_json(const Json& j);
    bool operator==(const ExperimentConfig& other) const;

    /// FNV-1a hash of the canonical JSON encoding.
    std::string hash() const;
};

/// Minimal TOML reader covering the config format: [section] headers,
/// key = value with numbers, booleans, quoted strings and flat arrays.
std::map<std::string, std::string> parse_toml(const std::string& text);

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides);
/// Applies parsed entries on top of a base config (scenario defaults or the
/// built-in defaults).
ExperimentConfig config_from_entries(const std::map<std::string, std::string>& entries,
                                     const ExperimentConfig& base = {});

/// Named scenario library: plate-linear, plate-vk, cylinder-vk, sphere-vk.
ExperimentConfig scenario_config(const std::string& name);

} // namespace shellvk

#endif
