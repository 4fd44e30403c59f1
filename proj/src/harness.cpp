#include "shellvk/harness.hpp"

#include "shellvk/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>

namespace shellvk {

namespace {

std::string fmt(Real v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string h_tag(Real h) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", h);
    std::string s = buf;
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

Real field_l2(const Reduction& red, const MatX& field, const ShellMesh& m) {
    Real acc = 0;
    for (int j = 0; j <= m.n2(); ++j)
        for (int i = 0; i <= m.n1(); ++i)
            acc += red.node_weight(i, j) * field.row(m.chart_node_id(i, j)).squaredNorm();
    return std::sqrt(acc);
}

Real strain_l2(const Reduction& red, const std::vector<Mat2>& field, const ShellMesh& m) {
    Real acc = 0;
    for (int j = 0; j <= m.n2(); ++j)
        for (int i = 0; i <= m.n1(); ++i)
            acc += red.node_weight(i, j) * field[m.chart_node_id(i, j)].squaredNorm();
    return std::sqrt(acc);
}

std::string orientation_note(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "orientation=" << c.orientation
       << " (normal reported outward/+e3 for +1; curvature tensor paired with the director "
          "m = -n); weak-star limits checked as strong L2 distances at sample times";
    return os.str();
}

} // namespace

std::string resolve_outdir(const ExperimentConfig& c) {
    if (const char* env = std::getenv("SHELLVK_OUT"); env && *env) return env;
    return c.output_dir;
}

void write_artifacts(RunArtifacts& a, const std::string& outdir) {
    std::filesystem::create_directories(outdir);
    for (const auto& [name, content] : a.files) {
        const std::string path = outdir + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw InputError("cannot write artifact: " + path);
        out << content;
        a.written_paths.push_back(path);
    }
}

Sim3DResult simulate3d(const ExperimentConfig& c, Real h, std::shared_ptr<ShellMesh> mesh) {
    c.validate();
    if (h > c.h0) throw ConfigError("simulate3d: h exceeds h0");
    Sim3DResult res;
    const Chart chart = c.make_chart();
    res.mesh = mesh ? mesh : std::make_shared<ShellMesh>(chart, c.n1, c.n2, c.ns, c.h0, c.nq);
    const ScalingLaw scaling = c.make_scaling(h);
    res.solver = std::make_shared<Solver3D>(*res.mesh, c.make_material(), scaling,
                                            c.make_solver3d_options());
    const Forcing forcing = c.make_forcing();

    State3D state = res.solver->init_state(c.make_initial3d());
    const Energy3D e0 = res.solver->energy(state);
    const Real slack_tol = c.tol_energy_rel * std::max(e0.total(), Real(1e-300));

    const long nsteps = std::llround(c.t_end / c.dt);
    if (nsteps < 1 || std::abs(nsteps * c.dt - c.t_end) > 1e-9 * c.t_end)
        throw ConfigError("t_end must be an integer multiple of dt");
    std::vector<long> sample_steps;
    for (Real ts : c.sample_times) sample_steps.push_back(std::llround(ts / c.dt));

    Reduction red(*res.solver);
    std::ostringstream energy_csv, diag_csv;
    energy_csv << "t,kinetic,elastic,work,slack\n";
    diag_csv << "t,Vh_l2,Vht_l2,zeta_l2,strain_l2,energy_ratio,rh_dist,y_pi_h1\n";

    Real work_cum = 0;
    auto emit_energy = [&](Real t, const Energy3D& e, Real slack) {
        energy_csv << fmt(t) << ',' << fmt(e.kinetic) << ',' << fmt(e.elastic) << ','
                   << fmt(work_cum) << ',' << fmt(slack) << '\n';
    };
    auto emit_diag = [&](const State3D& s) {
        const DiagnosticsSample d = red.sample(s);
        diag_csv << fmt(s.t) << ',' << fmt(field_l2(red, d.Vh, *res.mesh)) << ','
                 << fmt(field_l2(red, d.Vh_t, *res.mesh)) << ','
                 << fmt(field_l2(red, d.zeta_scaled, *res.mesh)) << ','
                 << fmt(strain_l2(red, d.strain_h, *res.mesh)) << ',' << fmt(d.energy_ratio)
                 << ',' << fmt(d.rh_identity_dist) << ',' << fmt(d.y_pi_h1) << '\n';
    };

    emit_energy(0.0, e0, 0.0);
    res.sup_energy_ratio = res.solver->energy_ratio(state);
    for (long step_i = 0; step_i < nsteps; ++step_i) {
        if (std::find(sample_steps.begin(), sample_steps.end(), step_i) != sample_steps.end()) {
            emit_diag(state);
            res.snapshots.push_back(state);
        }
        StepReport3D rep;
        state = res.solver->step(state, c.dt, forcing, &rep);
        work_cum += rep.work;
        res.newton_total += rep.newton_iters;
        res.max_slack = std::max(res.max_slack, rep.slack);
        if (rep.slack > slack_tol) res.energy_flagged = true;
        res.sup_energy_ratio = std::max(res.sup_energy_ratio, res.solver->energy_ratio(state));
        emit_energy(state.t, res.solver->energy(state), rep.slack);
    }
    if (std::find(sample_steps.begin(), sample_steps.end(), nsteps) != sample_steps.end()) {
        emit_diag(state);
        res.snapshots.push_back(state);
    }

    const std::string base = c.scenario + "_h" + h_tag(h);
    res.artifacts.files[base + "_energy.csv"] = energy_csv.str();
    res.artifacts.files[base + "_diagnostics.csv"] = diag_csv.str();

    Json summary;
    summary["version"] = kVersion;
    summary["kind"] = "simulate3d";
    summary["status"] = "ok";
    summary["h"] = h;
    summary["e_h"] = scaling.e_h;
    summary["eps"] = scaling.eps();
    summary["steps"] = nsteps;
    summary["initial_energy"] = e0.total();
    summary["final_energy"] = res.solver->energy(state).total();
    summary["sup_energy_ratio"] = res.sup_energy_ratio;
    summary["max_slack"] = res.max_slack;
    summary["slack_tol"] = slack_tol;
    summary["energy_flagged"] = res.energy_flagged;
    summary["newton_iterations"] = res.newton_total;
    summary["note"] = orientation_note(c);
    summary["config"] = c.to_json();
    summary["config_hash"] = c.hash();
    res.artifacts.summary_name = base + "_summary.json";
    res.artifacts.files[res.artifacts.summary_name] = summary.dump(2) + "\n";
    return res;
}

Sim2DResult simulate2d(const ExperimentConfig& c) {
    c.validate();
    Sim2DResult res;
    const Chart chart = c.make_chart();
    res.solver = std::make_shared<Solver2D>(chart, c.n1, c.n2, c.make_material(),
                                            c.limit_kappa(), c.make_solver2d_options());
    const Forcing forcing = c.make_forcing();

    State2D state =
        c.projected_init
            ? res.solver->init_limit_projected({c.bending_profile, c.bending_amp},
                                               {c.velocity_profile, c.velocity_amp}, c.eps_proj)
            : res.solver->init_limit({c.bending_profile, c.bending_amp},
                                     {c.velocity_profile, c.velocity_amp});

    const long nsteps = std::llround(c.t_end / c.dt);
    if (nsteps < 1 || std::abs(nsteps * c.dt - c.t_end) > 1e-9 * c.t_end)
        throw ConfigError("t_end must be an integer multiple of dt");
    std::vector<long> sample_steps;
    for (Real ts : c.sample_times) sample_steps.push_back(std::llround(ts / c.dt));

    std::ostringstream csv;
    csv << "t,V_l2,Vt_l2,kinetic,bending,membrane,penalty,kappa0_energy,constraint_residual,"
           "residual_B\n";
    auto emit = [&](const State2D& s) {
        const Energy2D e = res.solver->energy(s);
        const Real v_l2 = std::sqrt(std::max(Real(0), s.V.dot(res.solver->mass_matrix() * s.V)));
        const Real vt_l2 =
            std::sqrt(std::max(Real(0), s.Vt.dot(res.solver->mass_matrix() * s.Vt)));
        const Real rb = (s.kappa > 0) ? res.solver->residual_B(s.um, s.V) : 0.0;
        csv << fmt(s.t) << ',' << fmt(v_l2) << ',' << fmt(vt_l2) << ',' << fmt(e.kinetic) << ','
            << fmt(e.bending) << ',' << fmt(e.membrane) << ',' << fmt(e.penalty) << ','
            << fmt(e.kappa0_total()) << ',' << fmt(res.solver->constraint_residual(s.V)) << ','
            << fmt(rb) << '\n';
    };

    emit(state);
    Real max_rb = 0, max_constraint = 0;
    for (long step_i = 0; step_i < nsteps; ++step_i) {
        if (std::find(sample_steps.begin(), sample_steps.end(), step_i) != sample_steps.end())
            res.snapshots.push_back(state);
        StepReport2D rep;
        state = res.solver->step_vk(state, c.dt, forcing, &rep);
        max_rb = std::max(max_rb, rep.residual_B);
        max_constraint = std::max(max_constraint, rep.constraint_residual);
        emit(state);
    }
    if (std::find(sample_steps.begin(), sample_steps.end(), nsteps) != sample_steps.end())
        res.snapshots.push_back(state);

    const std::string base = c.scenario + "_2d";
    res.artifacts.files[base + "_series.csv"] = csv.str();

    Json summary;
    summary["version"] = kVersion;
    summary["kind"] = "simulate2d";
    summary["status"] = "ok";
    summary["kappa"] = c.limit_kappa();
    summary["steps"] = nsteps;
    summary["max_residual_B"] = max_rb;
    summary["max_constraint_residual"] = max_constraint;
    summary["final_energy"] = res.solver->energy(state).total();
    summary["note"] = orientation_note(c);
    summary["config"] = c.to_json();
    summary["config_hash"] = c.hash();
    res.artifacts.summary_name = base + "_summary.json";
    res.artifacts.files[res.artifacts.summary_name] = summary.dump(2) + "\n";
    return res;
}

SweepResult run_sweep(const ExperimentConfig& c) {
    c.validate();
    if (c.h_list.size() < 3) throw ConfigError("sweep needs at least 3 thicknesses in h_list");
    SweepResult sw;

    Sim2DResult lim = simulate2d(c);
    for (const auto& [name, content] : lim.artifacts.files) sw.artifacts.files[name] = content;
    if (lim.snapshots.size() != c.sample_times.size())
        throw ConfigError("sample_times must align with the time grid");

    const Chart chart = c.make_chart();
    auto mesh = std::make_shared<ShellMesh>(chart, c.n1, c.n2, c.ns, c.h0, c.nq);

    std::vector<Sim3DResult> runs(c.h_list.size());
    bool complete = true;
    std::vector<std::string> failures(c.h_list.size());
    auto run_one = [&](std::size_t k) {
        try {
            runs[k] = simulate3d(c, c.h_list[k], mesh);
        } catch (const std::exception& e) {
            failures[k] = e.what();
        }
    };
    if (c.jobs > 1) {
        std::vector<std::future<void>> futs;
        for (std::size_t k = 0; k < c.h_list.size(); ++k)
            futs.push_back(std::async(std::launch::async, run_one, k));
        for (auto& f : futs) f.get();
    } else {
        for (std::size_t k = 0; k < c.h_list.size(); ++k) run_one(k);
    }

    std::vector<ReportRow> rows;
    std::vector<ReferenceSample> refs;
    for (std::size_t k = 0; k < c.h_list.size(); ++k) {
        if (!failures[k].empty()) {
            complete = false;
            continue;
        }
        const Sim3DResult& r = runs[k];
        for (const auto& [name, content] : r.artifacts.files)
            sw.artifacts.files[name] = content;
        Reduction red(*r.solver);
        if (refs.empty())
            for (const State2D& s2 : lim.snapshots) refs.push_back(red.reference(*lim.solver, s2));
        ReportRow row;
        row.h = c.h_list[k];
        row.e_h = r.solver->scaling().e_h;
        row.sup_energy_ratio = r.sup_energy_ratio;
        row.times = c.sample_times;
        for (std::size_t ti = 0; ti < r.snapshots.size(); ++ti) {
            const DiagnosticsSample d = red.sample(r.snapshots[ti]);
            row.dist.push_back(red.distances(d, refs[ti]));
            if (ti + 1 == r.snapshots.size()) {
                row.y_pi_h1_final = d.y_pi_h1;
                row.rh_dist_final = d.rh_identity_dist;
            }
        }
        rows.push_back(row);
    }

    Json verdicts;
    verdicts["version"] = kVersion;
    verdicts["kind"] = "sweep";
    verdicts["complete"] = complete;
    for (std::size_t k = 0; k < failures.size(); ++k)
        if (!failures[k].empty())
            verdicts["failures"][h_tag(c.h_list[k])] = failures[k];

    if (rows.size() >= 3) {
        sw.report = build_report(rows, orientation_note(c));
        std::ostringstream rc;
        rc << "h,e_h,sup_energy_ratio";
        for (Real t : c.sample_times)
            rc << ",dV@" << fmt(t) << ",dVt@" << fmt(t) << ",dzeta@" << fmt(t) << ",dstrain@"
               << fmt(t) << ",dEbar@" << fmt(t) << ",dEhat@" << fmt(t);
        rc << ",y_pi_h1,rh_dist\n";
        for (const ReportRow& row : sw.report.rows) {
            rc << fmt(row.h) << ',' << fmt(row.e_h) << ',' << fmt(row.sup_energy_ratio);
            for (const auto& d : row.dist)
                rc << ',' << fmt(d.dV) << ',' << fmt(d.dVt) << ',' << fmt(d.dzeta) << ','
                   << fmt(d.dstrain) << ',' << fmt(d.dEbar) << ',' << fmt(d.dEhat);
            rc << ',' << fmt(row.y_pi_h1_final) << ',' << fmt(row.rh_dist_final) << '\n';
        }
        sw.artifacts.files[c.scenario + "_sweep_report.csv"] = rc.str();

        verdicts["converged"] = sw.report.converged;
        verdicts["energy_ratio_bounded"] = sw.report.energy_ratio_bounded;
        verdicts["energy_ratio_ratios"] = sw.report.energy_ratio_ratios;
        for (const TrendVerdict& v : sw.report.verdicts) {
            Json jv;
            jv["strictly_decreasing"] = v.strictly_decreasing;
            jv["non_increasing"] = v.non_increasing;
            jv["ratios"] = v.ratios;
            verdicts["metrics"][v.metric] = jv;
        }
        verdicts["note"] = sw.report.orientation_note;
    } else {
        complete = false;
        verdicts["complete"] = false;
    }
    sw.complete = complete;
    verdicts["config"] = c.to_json();
    verdicts["config_hash"] = c.hash();
    sw.artifacts.summary_name = c.scenario + "_sweep_verdicts.json";
    sw.artifacts.files[sw.artifacts.summary_name] = verdicts.dump(2) + "\n";
    return sw;
}

namespace {

struct SuiteLog {
    std::ostringstream table;
    bool all_pass = true;
    void row(const std::string& suite, const std::string& name, bool pass,
             const std::string& detail) {
        table << suite << ',' << name << ',' << (pass ? "PASS" : "FAIL") << ',' << detail << '\n';
        all_pass = all_pass && pass;
    }
};

} // namespace

SelftestResult run_selftest(std::uint64_t seed, bool inject_bad_material) {
    using namespace oracles;
    SuiteLog log;
    Rng rng(seed);
    MaterialModel mat(1.0, 1.0);

    // material axioms
    {
        Real worst = 0;
        for (int k = 0; k < 1000; ++k) {
            const Mat3 R = random_rotation(rng);
            const Mat3 F = random_matrix(rng, 1.0) + Mat3::Identity();
            worst = std::max(worst, std::abs(mat.energy_density(R * F) - mat.energy_density(F)) /
                                        (1.0 + std::abs(mat.energy_density(F))));
            worst = std::max(worst, mat.energy_density(R));
        }
        log.row("material", "frame_indifference", worst <= 1e-12, fmt(worst));
    }
    {
        Real worst = 0;
        for (int k = 0; k < 100; ++k) {
            const Mat3 F = Mat3::Identity() + random_matrix(rng, 0.5);
            const Mat3 S = mat.stress(F) * F.transpose();
            worst = std::max(worst, (S - S.transpose()).norm());
        }
        log.row("material", "stress_times_FT_symmetric", worst <= 1e-12, fmt(worst));
    }
    {
        Real worst = 0;
        QuadraticForms forms(mat);
        std::vector<MaterialModel> mats = {MaterialModel(1, 1), MaterialModel(2, 0.5),
                                           MaterialModel(0.7, 2.3)};
        for (const MaterialModel& m : mats) {
            QuadraticForms f(m);
            for (int k = 0; k < 40; ++k) {
                const Mat2 G = random_matrix2(rng, 1.5);
                const Real closed = f.q2(G);
                const Real brute = brute_force_q2(m, G);
                worst = std::max(worst, std::abs(closed - brute) / (1.0 + std::abs(closed)));
            }
        }
        log.row("material", "q2_relaxation_oracle", worst <= 1e-10, fmt(worst));
    }
    {
        MaterialModel probe = mat;
        if (inject_bad_material) probe.lambda = -3.5; // corrupted fixture
        QuadraticForms f(probe);
        // smallest eigenvalue of L2 on symmetric 2x2 matrices
        Mat3 op; // basis: e11, e22, sqrt2*e12
        op.setZero();
        const Real ls = 2.0 * probe.mu * probe.lambda / (2.0 * probe.mu + probe.lambda);
        op(0, 0) = 2 * probe.mu + ls;
        op(1, 1) = 2 * probe.mu + ls;
        op(0, 1) = op(1, 0) = ls;
        op(2, 2) = 2 * probe.mu;
        Eigen::SelfAdjointEigenSolver<Mat3> es(op);
        const Real lmin = es.eigenvalues().minCoeff();
        log.row("material", "l2_positive_definite", lmin > 0, fmt(lmin));
        (void)f;
    }
    {
        const Real cfit = coercivity_constant(mat, rng, 1000);
        log.row("material", "local_coercivity_constant", cfit > 0, fmt(cfit));
    }

    // geometry invariants
    {
        const Chart charts[3] = {Chart::plate(1, 1), Chart::cylinder(1, 1.2, 1),
                                 Chart::sphere_patch(2, 0.5)};
        Real worst = 0;
        std::uniform_real_distribution<Real> u01(0.0, 1.0);
        for (const Chart& ch : charts) {
            for (int k = 0; k < 334; ++k) {
                const Vec2 lo = ch.param_lo(), hi = ch.param_hi();
                const Vec2 xi(lo[0] + (hi[0] - lo[0]) * u01(rng),
                              lo[1] + (hi[1] - lo[1]) * u01(rng));
                const ChartFrame f = ch.frame(xi);
                std::uniform_real_distribution<Real> uc(-1.0, 1.0);
                const Vec3 tau = uc(rng) * f.that1 + uc(rng) * f.that2;
                worst = std::max(worst, std::abs(f.n.dot(f.Pi * tau)));
                worst = std::max(worst, ((f.Pi - f.Pi.transpose()) * tau).norm() /
                                            std::max(tau.norm(), Real(1e-12)));
            }
        }
        log.row("geometry", "curvature_tangency_symmetry", worst <= 1e-10, fmt(worst));
    }

    // 3D residual consistency against finite differences of the energy
    {
        const Chart chart = Chart::plate(1, 1);
        ShellMesh mesh(chart, 2, 2, 2, 0.1);
        Solver3DOptions opts;
        ScalingLaw sc = ScalingLaw::kappa_h4(1.0, 0.05);
        Solver3D solver(mesh, mat, sc, opts);
        State3D st = solver.init_state({{"normal_bump", 0.4}, {"zero", 0}, {"zero", 0}, false});
        const Forcing none;
        const VecX r = solver.assemble_residual(st, none);
        Real worst = 0;
        const Real step = 1e-6;
        int checked = 0;
        for (int d = 0; d < solver.num_dofs() && checked < 12; d += 37) {
            if (solver.is_clamped_node(d / 3)) continue;
            ++checked;
            State3D sp = st, sm = st;
            sp.y[d] += step;
            sm.y[d] -= step;
            const Real fd =
                (solver.energy(sp).elastic - solver.energy(sm).elastic) / (2 * step);
            worst = std::max(worst, std::abs(fd - r[d]) / (1.0 + std::abs(fd)));
        }
        log.row("solver3d", "residual_matches_energy_gradient", worst <= 1e-6, fmt(worst));
    }

    // energy inequality on a short forced plate run
    {
        ExperimentConfig c = scenario_config("plate-vk");
        c.n1 = c.n2 = 4;
        c.ns = 2;
        c.t_end = 0.02;
        c.sample_times = {0.0, 0.02};
        c.newton_tol = 1e-12;
        Sim3DResult r = simulate3d(c, 0.05);
        const bool pass = !r.energy_flagged;
        log.row("solver3d", "energy_inequality_slack", pass, fmt(r.max_slack));
    }

    // plate reduction identity
    {
        ExperimentConfig c = scenario_config("plate-vk");
        Solver2D lim(Chart::plate(1, 1), 4, 4, mat, 1.0, c.make_solver2d_options());
        const PlateOperators ops = classical_plate_operators(lim);
        Real worst = matrix_distance(lim.mass_matrix(), ops.mass);
        worst = std::max(worst, matrix_distance(lim.bending_matrix(), ops.bending));
        worst = std::max(worst, matrix_distance(lim.penalty_matrix(), ops.penalty));
        worst = std::max(worst, matrix_distance(lim.membrane_gram(), ops.membrane_gram));
        log.row("solver2d", "plate_reduction_identity", worst <= 1e-12, fmt(worst));
    }

    // kappa = 0 limit flow conserves kinetic + bending energy
    {
        ExperimentConfig c = scenario_config("plate-linear");
        c.n1 = c.n2 = 4;
        c.t_end = 0.05;
        c.sample_times = {0.0, 0.05};
        Sim2DResult r = simulate2d(c);
        bool pass = r.snapshots.size() == 2;
        Real drift = 0;
        if (pass) {
            const Real ea = r.solver->energy(r.snapshots[0]).kappa0_total();
            const Real eb = r.solver->energy(r.snapshots[1]).kappa0_total();
            drift = std::abs(eb - ea) / std::max(ea, Real(1e-300));
            pass = drift <= 1e-8;
        }
        log.row("solver2d", "kappa0_energy_conserved", pass, fmt(drift));
    }

    // determinism: identical seeds give byte-identical artifacts
    {
        ExperimentConfig c = scenario_config("plate-vk");
        c.n1 = c.n2 = 3;
        c.ns = 2;
        c.t_end = 0.005;
        c.sample_times = {0.0};
        c.seed = seed;
        Sim3DResult a = simulate3d(c, 0.05);
        Sim3DResult b = simulate3d(c, 0.05);
        const bool same = a.artifacts.files == b.artifacts.files;
        log.row("harness", "determinism_rerun_identical", same, same ? "identical" : "differs");
    }

    SelftestResult out;
    out.table = log.table.str();
    out.all_pass = log.all_pass;
    return out;
}

RunArtifacts cli_simulate3d(const ExperimentConfig& c) {
    Sim3DResult r = simulate3d(c, c.h);
    write_artifacts(r.artifacts, resolve_outdir(c));
    return r.artifacts;
}

RunArtifacts cli_simulate2d(const ExperimentConfig& c) {
    Sim2DResult r = simulate2d(c);
    write_artifacts(r.artifacts, resolve_outdir(c));
    return r.artifacts;
}

RunArtifacts cli_sweep(const ExperimentConfig& c) {
    SweepResult r = run_sweep(c);
    write_artifacts(r.artifacts, resolve_outdir(c));
    if (!r.complete) throw SolverError("sweep incomplete: see verdicts JSON for failures");
    return r.artifacts;
}

} // namespace shellvk
