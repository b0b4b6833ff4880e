// Command-line driver: solve a configured problem, run diagnostics on a
// checkpoint, execute a sweep plan, or rebuild report/plot data.
// Exit codes: 0 success, 2 hypothesis violation, 3 solver failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "hjdg/config.hpp"
#include "hjdg/diagnostics.hpp"
#include "hjdg/experiment.hpp"
#include "hjdg/grid_io.hpp"
#include "hjdg/solver.hpp"

namespace fs = std::filesystem;
using namespace hjdg;

namespace {

int cmd_solve(const std::string& config_path, const std::string& out_dir, bool force) {
    const auto j = load_json(config_path);
    const auto spec = problem_from_json(j);
    const auto scheme = scheme_from_json(j.contains("scheme") ? j.at("scheme") : nlohmann::json());

    const auto violations = validate_problem(spec);
    if (!violations.empty()) {
        for (const auto& v : violations) std::cerr << "hypothesis violation: " << v << '\n';
        if (!force) return 2;
    }

    const auto res = solve(spec, scheme);
    fs::create_directories(out_dir);
    write_checkpoint(res.field, out_dir + "/solution.hjdg");
    std::ofstream meta(out_dir + "/solve.meta");
    meta << res.meta.to_kv();
    std::cout << "wrote " << out_dir << "/solution.hjdg (" << res.field.grid.num_slices()
              << " slices, " << res.field.grid.cells_total() << " cells)\n"
              << res.meta.to_kv();
    return 0;
}

int cmd_diagnose(const std::string& config_path, const std::string& ckpt_path,
                 const std::string& out_dir, double tol) {
    const auto j = load_json(config_path);
    auto spec = problem_from_json(j);
    const auto u = read_checkpoint(ckpt_path);
    if (!u.grid.same_layout(spec.grid))
        std::cerr << "note: checkpoint grid differs from the config grid; using the checkpoint\n";
    spec.grid = u.grid;

    fs::create_directories(out_dir);
    const int n = u.grid.dim;

    // oscillation profile at the cylinder anchor (0, 0) with the defaults
    ExperimentPlan dummy;
    const double beta1 = dummy.default_beta1();
    const auto osc = oscillation_profile(u, 8.0 / 7.0, beta1, spec.p, 6);
    {
        std::ofstream os(out_dir + "/osc.csv");
        os << "k,scale,osc,samples\n";
        for (const auto& lv : osc.levels)
            os << lv.k << ',' << format_g17(lv.scale) << ',' << format_g17(lv.osc) << ','
               << lv.samples << '\n';
        os << "fit," << format_g17(osc.gamma) << ',' << format_g17(osc.fit_residual) << ','
           << osc.levels.size() << '\n';
    }
    std::cout << "oscillation: gamma=" << osc.gamma << " residual=" << osc.fit_residual
              << (osc.degenerate ? " (degenerate)" : "") << '\n';

    // interstitial + DG1 need the normalized window
    try {
        const auto im = interstitial_measure(u);
        std::ofstream os(out_dir + "/interstitial.csv");
        os << "below,between,above\n"
           << format_g17(im.below) << ',' << format_g17(im.between) << ','
           << format_g17(im.above) << '\n';
        std::cout << "interstitial: below=" << im.below << " between=" << im.between
                  << " above=" << im.above << '\n';
    } catch (const HypothesisError& e) {
        std::cout << "interstitial skipped: " << e.what() << '\n';
    }
    try {
        const auto cfg = dg1_config(spec.p, spec.m, n);
        TruncationLadder<double> ladder;
        const auto rep = dg1_iterate(u, cfg, ladder, &spec.source);
        std::ofstream os(out_dir + "/energy.csv");
        os << "k,C_k,measure,E_k,lhs,rhs6,rhs7,rhs8\n";
        for (const auto& lv : rep.levels)
            os << lv.k << ',' << format_g17(lv.height) << ',' << format_g17(lv.measure) << ','
               << format_g17(lv.energy) << ',' << format_g17(lv.lhs) << ','
               << format_g17(lv.rhs6) << ',' << (lv.rhs7 ? format_g17(*lv.rhs7) : "") << ','
               << (lv.rhs8 ? format_g17(*lv.rhs8) : "") << '\n';
        std::cout << "dg1: sup_q1=" << rep.sup_q1 << " conclusion(u<=1/2 on Q1)="
                  << (rep.conclusion_le_half ? "holds" : "fails") << '\n';
    } catch (const HypothesisError& e) {
        std::cout << "dg1 skipped: " << e.what() << '\n';
    } catch (const std::invalid_argument& e) {
        std::cout << "dg1 skipped: " << e.what() << '\n';
    }
    (void)tol;
    return 0;
}

int cmd_sweep(const std::string& plan_path, const std::string& out_override, int workers_override,
              double tol_override) {
    auto plan = plan_from_json(load_json(plan_path));
    if (!out_override.empty()) plan.out_dir = out_override;
    if (workers_override > 0) plan.workers = workers_override;
    if (tol_override > 0) plan.tol = tol_override;

    SweepReport rep;
    if (plan.dg.enabled) {
        rep = run_dg_pipeline(plan);
    } else {
        rep = run_holder_experiment(plan);
    }
    write_report_csvs(rep, plan, plan.out_dir);
    emit_plotdata(rep, plan.out_dir);

    int ok = 0;
    for (const auto& po : rep.points)
        if (po.error_code == 0) ++ok;
    std::cout << "sweep: " << ok << "/" << rep.points.size() << " points succeeded; output in "
              << plan.out_dir << '\n';
    for (const auto& po : rep.points)
        if (po.error_code != 0)
            std::cout << "  point " << po.point.index << " error " << po.error_code << ": "
                      << po.error << '\n';
    if (rep.any_hypothesis_violation) return 2;
    if (rep.any_solver_failure) return 3;
    return 0;
}

int cmd_report(const std::string& dir) {
    const int rows = rebuild_report(dir);
    std::cout << "report: rebuilt summary and plot data for " << rows << " points in " << dir
              << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"viscous Hamilton-Jacobi solver and regularity diagnostics"};
    app.require_subcommand(1);

    std::string config_path, ckpt_path, plan_path, report_dir;
    std::string out_dir = "out";
    int workers = 0;
    double tol = 0;
    bool force = false;

    auto* s_solve = app.add_subcommand("solve", "solve a configured problem");
    s_solve->add_option("config", config_path)->required();
    s_solve->add_option("--out", out_dir);
    s_solve->add_flag("--force", force, "run despite hypothesis violations");

    auto* s_diag = app.add_subcommand("diagnose", "run diagnostics on a checkpoint");
    s_diag->add_option("config", config_path)->required();
    s_diag->add_option("checkpoint", ckpt_path)->required();
    s_diag->add_option("--out", out_dir);
    s_diag->add_option("--tol", tol);

    auto* s_sweep = app.add_subcommand("sweep", "run an experiment plan");
    s_sweep->add_option("plan", plan_path)->required();
    s_sweep->add_option("--out", out_dir)->default_val("");
    s_sweep->add_option("--workers", workers);
    s_sweep->add_option("--tol", tol);

    auto* s_report = app.add_subcommand("report", "rebuild summary/plot data from an output dir");
    s_report->add_option("dir", report_dir)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (s_solve->parsed()) return cmd_solve(config_path, out_dir, force);
        if (s_diag->parsed()) return cmd_diagnose(config_path, ckpt_path, out_dir, tol);
        if (s_sweep->parsed()) return cmd_sweep(plan_path, out_dir, workers, tol);
        if (s_report->parsed()) return cmd_report(report_dir);
    } catch (const HypothesisError& e) {
        std::cerr << "hypothesis violation: " << e.what() << '\n';
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
