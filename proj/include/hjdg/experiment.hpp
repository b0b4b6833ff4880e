#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hjdg/config.hpp"
#include "hjdg/diagnostics.hpp"
#include "hjdg/solver.hpp"

namespace hjdg {

struct SweepPoint {
    int index = 0;
    double epsilon = 0;
    int block_cells = 1;
    bool flip_sign = false;
    double source_strength = 1;  // multiplier on the base source value
    int refine = 1;              // grid refinement factor (h, dt divided)
};

struct HolderSettings {
    bool enabled = true;
    double alpha1 = 8.0 / 7.0;
    std::optional<double> beta1;       // default: 1/4 halved until 3*beta1 <= 1/4
    int k_max = 6;
    double center_time_frac = 2.0 / 3.0;  // oscillation center within the run
    std::optional<VectorX<double>> center_x;
    std::optional<double> lambda_star;    // defaults to K0 from the barrier search
    int random_centers = 0;               // extra jittered centers (seeded)
};

struct DgSettings {
    bool enabled = false;
    std::optional<double> mu0;  // default: 1.25 * |Q2|, giving a one-level ladder
    double delta0 = 0.1;
    double b = 1.0;
    int ladder_k_max = 6;
};

struct ExperimentPlan {
    nlohmann::json base;  // problem config
    SchemeConfig<double> scheme;
    std::vector<double> epsilons;
    std::vector<int> block_cells;
    std::vector<int> flip_signs;
    std::vector<double> source_strengths;
    std::vector<int> refines;
    HolderSettings holder;
    DgSettings dg;
    std::string out_dir = "out";
    int workers = 1;
    unsigned long long seed = 0;
    double tol = 1e-9;
    bool allow_probes = false;

    std::vector<SweepPoint> points() const;
    ProblemSpec<double> instantiate(const SweepPoint& pt) const;
    double default_beta1() const;
};

ExperimentPlan plan_from_json(const nlohmann::json& j);

/// The rescale bookkeeping of a normalization onto Q3.
struct Normalization {
    double alpha_w = 1, beta_w = 1;
    double time_factor = 1;  // alpha_w^(p-1) beta_w^p
    double t_center = 0;
    VectorX<double> x_center;
    double sup_bar = 0;  // ||u + Lambda t||_inf before scaling
};

struct NormalizedField {
    GridField<double> w;
    Normalization norm;
};

/// u + Lambda t, rescaled by the alpha_w/beta_w recipe onto a grid covering
/// Q3 with ||w||_inf <= 2 and the Lambda_0 smallness condition.
NormalizedField normalize_to_q3(const GridField<double>& u, const ProblemSpec<double>& spec,
                                double center_time_frac,
                                const std::optional<VectorX<double>>& center_x,
                                std::optional<double> lambda_star);

struct PointOutcome {
    SweepPoint point;
    int error_code = 0;  // 0 ok, 2 hypothesis violation, 3 solver failure, 1 other
    std::string error;
    std::vector<std::string> violations;  // validate_problem findings
    RunMetadata meta;
    Normalization norm;
    double sup_u = 0;

    // holder pipeline
    OscillationProfile<double> osc;
    double theory_gamma = 0;
    std::vector<OscillationProfile<double>> extra_osc;

    // dg pipeline
    bool mostly_negative = true;
    double negative_fraction = 1;
    int k0 = 0;
    std::vector<InterstitialMeasure<double>> ladder;
    std::vector<double> meas_ge1;  // |{v_k >= 1} ∩ Q2_bar| per level
    std::optional<int> first_below_delta0;
    std::optional<EnergyReport<double>> energy_report;
};

struct SummaryRow {
    std::string axis;   // "epsilon" or "roughness"
    std::string group;  // the frozen coordinates
    double gamma_max = 0, gamma_min = 0, ratio = 0;
    int count = 0;
};

struct SweepReport {
    std::vector<PointOutcome> points;
    std::vector<SummaryRow> summary;
    bool any_hypothesis_violation = false;
    bool any_solver_failure = false;
};

SweepReport run_holder_experiment(const ExperimentPlan& plan);
SweepReport run_dg_pipeline(const ExperimentPlan& plan);

/// Per-point CSVs plus holder_report.csv / dg_report.csv and summary.csv.
void write_report_csvs(const SweepReport& rep, const ExperimentPlan& plan,
                       const std::string& dir);

/// Plot data: (epsilon, gamma), per-point (log scale, log osc) with a fit
/// row, per-point (k, E_k).
void emit_plotdata(const SweepReport& rep, const std::string& dir);

/// Rebuild the summary and plot data from an output directory; returns the
/// number of point rows seen.
int rebuild_report(const std::string& dir);

/// Least-squares slope recomputed from an emitted osc plot file.
FitResult<double> recompute_gamma_from_plot(const std::string& csv_path);

std::string format_g17(double v);

}  // namespace hjdg
