#include "hjdg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <thread>

#include "hjdg/barrier.hpp"
#include "hjdg/scaling.hpp"

namespace hjdg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// plan

double ExperimentPlan::default_beta1() const {
    double b = 0.25;
    while (3.0 * b > 0.25) b *= 0.5;  // shrink until 3*beta1 <= r*-proxy = 1/4
    return b;
}

std::vector<SweepPoint> ExperimentPlan::points() const {
    std::vector<SweepPoint> out;
    int idx = 0;
    for (double eps : epsilons)
        for (int b : block_cells)
            for (int fl : flip_signs)
                for (double s : source_strengths)
                    for (int r : refines) {
                        SweepPoint pt;
                        pt.index = idx++;
                        pt.epsilon = eps;
                        pt.block_cells = b;
                        pt.flip_sign = fl != 0;
                        pt.source_strength = s;
                        pt.refine = r;
                        out.push_back(pt);
                    }
    return out;
}

ProblemSpec<double> ExperimentPlan::instantiate(const SweepPoint& pt) const {
    json j = base;
    j["epsilon"] = pt.epsilon;
    if (!j.contains("diffusion")) j["diffusion"] = {{"kind", "scalar"}};
    j["diffusion"]["flip_sign"] = pt.flip_sign;
    if (j["diffusion"].value("kind", "scalar") == "checkerboard")
        j["diffusion"]["block"] = pt.block_cells;
    if (j.contains("source") && j["source"].contains("value"))
        j["source"]["value"] = j["source"]["value"].get<double>() * pt.source_strength;
    if (pt.refine > 1) {
        auto& jg = j["grid"];
        if (jg["cells"].is_number_integer()) {
            jg["cells"] = jg["cells"].get<int>() * pt.refine;
        } else {
            for (auto& c : jg["cells"]) c = c.get<int>() * pt.refine;
        }
        jg["h"] = jg["h"].get<double>() / pt.refine;
        jg["dt"] = jg["dt"].get<double>() / pt.refine;
    }
    return problem_from_json(j);
}

ExperimentPlan plan_from_json(const json& j) {
    ExperimentPlan plan;
    plan.base = j.at("base");
    plan.scheme = scheme_from_json(j.contains("scheme") ? j.at("scheme") : json());

    const json sweep = j.value("sweep", json::object());
    auto doubles = [&](const char* key, std::vector<double> dflt) {
        if (!sweep.contains(key)) return dflt;
        return sweep.at(key).get<std::vector<double>>();
    };
    auto ints = [&](const char* key, std::vector<int> dflt) {
        if (!sweep.contains(key)) return dflt;
        return sweep.at(key).get<std::vector<int>>();
    };
    plan.epsilons = doubles("epsilon", {plan.base.value("epsilon", 0.0)});
    int base_block = 1;
    bool base_flip = false;
    if (plan.base.contains("diffusion")) {
        base_block = plan.base["diffusion"].value("block", 1);
        base_flip = plan.base["diffusion"].value("flip_sign", false);
    }
    plan.block_cells = ints("block_cells", {base_block});
    plan.flip_signs = ints("flip_sign", {base_flip ? 1 : 0});
    plan.source_strengths = doubles("source_strength", {1.0});
    plan.refines = ints("refine", {1});

    if (j.contains("holder")) {
        const auto& h = j.at("holder");
        plan.holder.enabled = h.value("enabled", true);
        plan.holder.alpha1 = h.value("alpha1", 8.0 / 7.0);
        if (h.contains("beta1") && !h.at("beta1").is_null())
            plan.holder.beta1 = h.at("beta1").get<double>();
        plan.holder.k_max = h.value("k_max", 6);
        plan.holder.center_time_frac = h.value("center_time_frac", 2.0 / 3.0);
        if (h.contains("center_x") && !h.at("center_x").is_null()) {
            const auto v = h.at("center_x").get<std::vector<double>>();
            VectorX<double> c(Eigen::Index(v.size()));
            for (size_t i = 0; i < v.size(); ++i) c[Eigen::Index(i)] = v[i];
            plan.holder.center_x = c;
        }
        if (h.contains("lambda_star") && !h.at("lambda_star").is_null())
            plan.holder.lambda_star = h.at("lambda_star").get<double>();
        plan.holder.random_centers = h.value("random_centers", 0);
    }
    if (j.contains("dg")) {
        const auto& d = j.at("dg");
        plan.dg.enabled = d.value("enabled", true);
        if (d.contains("mu0") && !d.at("mu0").is_null())
            plan.dg.mu0 = d.at("mu0").get<double>();
        plan.dg.delta0 = d.value("delta0", 0.1);
        plan.dg.b = d.value("b", 1.0);
        plan.dg.ladder_k_max = d.value("ladder_k_max", 6);
    }
    plan.out_dir = j.value("out", "out");
    plan.workers = j.value("workers", 1);
    plan.seed = j.value("seed", 0ull);
    plan.tol = j.value("tol", 1e-9);
    plan.allow_probes = j.value("allow_probes", false);
    return plan;
}

// ---------------------------------------------------------------------------
// normalization onto Q3

NormalizedField normalize_to_q3(const GridField<double>& u, const ProblemSpec<double>& spec,
                                double center_time_frac,
                                const std::optional<VectorX<double>>& center_x,
                                std::optional<double> lambda_star) {
    const auto& g = u.grid;
    const double p = spec.p;

    // u_bar = u + Lambda t
    GridField<double> ubar = u;
    for (int j = 0; j < g.num_slices(); ++j)
        ubar.slice(j) += spec.lambda * g.time_at(j);

    Normalization nm;
    nm.sup_bar = ubar.values.abs().maxCoeff();
    nm.alpha_w = nm.sup_bar > 0 ? std::min(1.0, 2.0 / nm.sup_bar) : 1.0;

    const int jc = std::clamp(int(std::lround(center_time_frac * g.time_steps())), 1,
                              g.time_steps());
    nm.t_center = g.time_at(jc);
    nm.x_center = center_x.value_or(VectorX<double>::Zero(g.dim));

    double rho = std::numeric_limits<double>::infinity();
    for (int d = 0; d < g.dim; ++d) {
        rho = std::min(rho, nm.x_center[d] - g.domain_low(d));
        rho = std::min(rho, g.domain_high(d) - nm.x_center[d]);
    }
    rho -= g.h;  // stay inside the interpolation hull
    const double s = nm.t_center - g.t_start - g.dt;
    if (rho <= 0 || s <= 0)
        throw HypothesisError("normalize_to_q3: the center leaves no room for Q3");

    double beta = std::min({1.0, rho / 3.0,
                            std::pow(s / (4.0 * std::pow(nm.alpha_w, p - 1.0)), 1.0 / p)});
    if (spec.lambda0 > 0) {
        const double K0 = k0_search(spec.lambda, p, g.dim, BumpProfile<double>{});
        const double ls = lambda_star.value_or(K0);
        beta = std::min(beta, std::pow(ls * ls * K0 / (std::pow(nm.alpha_w, p - 1.0) * spec.lambda0),
                                       1.0 / (p - 2.0)));
    }
    beta *= 0.999;
    if (!(beta > 0)) throw HypothesisError("normalize_to_q3: no admissible beta_w");
    nm.beta_w = beta;
    nm.time_factor = std::pow(nm.alpha_w, p - 1.0) * std::pow(beta, p);

    // target grid covering Q3 at the induced resolution, capped
    int cells_w = std::clamp(int(std::ceil(6.0 * beta / g.h)), 16, 4096);
    int steps_w = std::clamp(int(std::ceil(4.0 * nm.time_factor / g.dt)), 16, 4096);
    while (double(cells_w) * double(steps_w) > 4e6) {
        if (steps_w >= cells_w && steps_w > 16) steps_w /= 2;
        else if (cells_w > 16) cells_w /= 2;
        else break;
    }
    const auto target = SpaceTimeGrid<double>::centered_cube(
        g.dim, cells_w, 6.0 / cells_w, 4.0 / steps_w, -4.0, 0.0);

    AffineMap<double> map;
    map.t_scale = nm.time_factor;
    map.t_offset = nm.t_center;
    map.x_scale = beta;
    map.x_offset = nm.x_center;

    NormalizedField out;
    out.w = resample(ubar, target, map);
    out.w.values *= nm.alpha_w;
    out.norm = nm;
    return out;
}

// ---------------------------------------------------------------------------
// sweep execution

namespace {

template <typename Fn>
std::vector<PointOutcome> run_points(const ExperimentPlan& plan, Fn&& one_point) {
    const auto pts = plan.points();
    std::vector<PointOutcome> results(pts.size());
    std::atomic<size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            const size_t i = cursor.fetch_add(1);
            if (i >= pts.size()) return;
            PointOutcome& out = results[i];
            out.point = pts[i];
            try {
                one_point(pts[i], out);
            } catch (const HypothesisError& e) {
                out.error_code = 2;
                out.error = e.what();
            } catch (const SolverError& e) {
                out.error_code = 3;
                out.error = e.what();
            } catch (const std::exception& e) {
                out.error_code = 1;
                out.error = e.what();
            }
        }
    };
    const int nw = std::max(1, std::min<int>(plan.workers, int(pts.size())));
    std::vector<std::thread> threads;
    for (int t = 1; t < nw; ++t) threads.emplace_back(worker);
    worker();
    for (auto& t : threads) t.join();
    return results;
}

bool prepare_point(const ExperimentPlan& plan, const SweepPoint& pt, PointOutcome& out,
                   ProblemSpec<double>& spec) {
    spec = plan.instantiate(pt);
    out.violations = validate_problem(spec);
    if (!out.violations.empty() && !plan.allow_probes) {
        out.error_code = 2;
        out.error = "hypothesis violation: " + out.violations.front();
        return false;
    }
    return true;
}

std::string group_key_without_eps(const SweepPoint& pt) {
    std::ostringstream os;
    os << "block=" << pt.block_cells << " flip=" << (pt.flip_sign ? 1 : 0)
       << " strength=" << pt.source_strength << " refine=" << pt.refine;
    return os.str();
}

std::string group_key_without_roughness(const SweepPoint& pt) {
    std::ostringstream os;
    os << "eps=" << pt.epsilon << " strength=" << pt.source_strength
       << " refine=" << pt.refine;
    return os.str();
}

void build_summary(SweepReport& rep) {
    auto add_axis = [&](const std::string& axis, auto key_fn) {
        std::map<std::string, std::vector<double>> groups;
        for (const auto& po : rep.points) {
            if (po.error_code != 0 || po.osc.degenerate) continue;
            groups[key_fn(po.point)].push_back(po.osc.gamma);
        }
        for (const auto& [key, gammas] : groups) {
            SummaryRow row;
            row.axis = axis;
            row.group = key;
            row.count = int(gammas.size());
            row.gamma_max = *std::max_element(gammas.begin(), gammas.end());
            row.gamma_min = *std::min_element(gammas.begin(), gammas.end());
            row.ratio = row.gamma_min > 0 ? row.gamma_max / row.gamma_min
                                          : std::numeric_limits<double>::quiet_NaN();
            rep.summary.push_back(row);
        }
    };
    add_axis("epsilon", group_key_without_eps);
    add_axis("roughness", group_key_without_roughness);
    for (const auto& po : rep.points) {
        if (po.error_code == 2) rep.any_hypothesis_violation = true;
        if (po.error_code == 3) rep.any_solver_failure = true;
    }
}

}  // namespace

SweepReport run_holder_experiment(const ExperimentPlan& plan) {
    const double beta1 = plan.holder.beta1.value_or(plan.default_beta1());
    const double alpha1 = plan.holder.alpha1;

    SweepReport rep;
    rep.points = run_points(plan, [&](const SweepPoint& pt, PointOutcome& out) {
        ProblemSpec<double> spec;
        if (!prepare_point(plan, pt, out, spec)) return;
        auto res = solve(spec, plan.scheme);
        out.meta = res.meta;
        out.sup_u = res.meta.sup_abs;
        auto nf = normalize_to_q3(res.field, spec, plan.holder.center_time_frac,
                                  plan.holder.center_x, plan.holder.lambda_star);
        out.norm = nf.norm;
        out.osc = oscillation_profile(nf.w, alpha1, beta1, spec.p, plan.holder.k_max);
        out.theory_gamma =
            -std::log(alpha1) / std::log(std::pow(alpha1, spec.p - 1.0) * std::pow(beta1, spec.p));

        if (plan.holder.random_centers > 0) {
            std::mt19937_64 rng(plan.seed + 0x9e3779b97f4a7c15ull * (pt.index + 1));
            for (int k = 0; k < plan.holder.random_centers; ++k) {
                VectorX<double> c(spec.grid.dim);
                for (int d = 0; d < spec.grid.dim; ++d) {
                    const double lo = spec.grid.domain_low(d), hi = spec.grid.domain_high(d);
                    const double mid = 0.5 * (lo + hi), half = 0.25 * (hi - lo);
                    std::uniform_real_distribution<double> dist(mid - half, mid + half);
                    c[d] = dist(rng);
                }
                try {
                    auto nfk = normalize_to_q3(res.field, spec, plan.holder.center_time_frac, c,
                                               plan.holder.lambda_star);
                    out.extra_osc.push_back(
                        oscillation_profile(nfk.w, alpha1, beta1, spec.p, plan.holder.k_max));
                } catch (const std::exception&) {
                    // a jittered center too close to the boundary is skipped
                }
            }
        }
    });
    build_summary(rep);
    return rep;
}

SweepReport run_dg_pipeline(const ExperimentPlan& plan) {
    SweepReport rep;
    rep.points = run_points(plan, [&](const SweepPoint& pt, PointOutcome& out) {
        ProblemSpec<double> spec;
        if (!prepare_point(plan, pt, out, spec)) return;
        auto res = solve(spec, plan.scheme);
        out.meta = res.meta;
        out.sup_u = res.meta.sup_abs;
        auto nf = normalize_to_q3(res.field, spec, plan.holder.center_time_frac,
                                  plan.holder.center_x, plan.holder.lambda_star);
        out.norm = nf.norm;

        const int n = spec.grid.dim;
        const auto q2 = ParabolicCylinder<double>::q2(n);
        const double mu0 = plan.dg.mu0.value_or(1.25 * q2.measure(n));
        out.k0 = k0_levels(mu0, q2.measure(n));
        const auto exps = compute_exponents(spec.p, spec.m, n);
        const double th_t = std::pow(2.0, out.k0 * exps.e1 / exps.e2);
        const double th_x = std::pow(2.0, out.k0 / exps.e2);
        const auto q_small =
            ParabolicCylinder<double>::make_origin(n, -4.0 * th_t, 0.0, 2.0 * th_x);

        auto maj = classify_majority(nf.w, q_small);
        out.mostly_negative = maj.mostly_negative;
        out.negative_fraction = maj.negative_fraction;

        const auto q2b = ParabolicCylinder<double>::q2_bar(n);
        GridField<double> v_final;
        for (int k = 0; k <= out.k0; ++k) {
            GridField<double> vk = dg_level_transform(maj.v, k);
            out.ladder.push_back(interstitial_measure(vk));
            out.meas_ge1.push_back(levelset_measure(vk, 1.0 - 1e-12, q2b));
            if (!out.first_below_delta0 && out.meas_ge1.back() < plan.dg.delta0)
                out.first_below_delta0 = k;
            if (k == out.k0) v_final = std::move(vk);
        }
        v_final.values -= 1.0;  // DG1 applies to v_{k0} - 1
        const auto cfg = dg1_config(spec.p, spec.m, n, plan.dg.b);
        TruncationLadder<double> ladder;
        ladder.k_max = plan.dg.ladder_k_max;
        out.energy_report = dg1_iterate(v_final, cfg, ladder, &spec.source);
    });
    build_summary(rep);
    return rep;
}

// ---------------------------------------------------------------------------
// CSV output

namespace {

std::string point_file(const std::string& dir, int index, const std::string& suffix) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "point_%03d_", index);
    return dir + "/" + buf + suffix;
}

void write_osc_csv(const OscillationProfile<double>& osc, const std::string& path) {
    std::ofstream os(path);
    os << "k,scale,osc,samples\n";
    for (const auto& lv : osc.levels)
        os << lv.k << ',' << format_g17(lv.scale) << ',' << format_g17(lv.osc) << ','
           << lv.samples << '\n';
    os << "fit," << format_g17(osc.gamma) << ',' << format_g17(osc.fit_residual) << ','
       << osc.levels.size() << '\n';
}

void write_energy_csv(const EnergyReport<double>& er, const std::string& path) {
    std::ofstream os(path);
    os << "k,C_k,measure,E_k,lhs,rhs6,rhs7,rhs8\n";
    for (const auto& lv : er.levels) {
        os << lv.k << ',' << format_g17(lv.height) << ',' << format_g17(lv.measure) << ','
           << format_g17(lv.energy) << ',' << format_g17(lv.lhs) << ',' << format_g17(lv.rhs6)
           << ',' << (lv.rhs7 ? format_g17(*lv.rhs7) : "") << ','
           << (lv.rhs8 ? format_g17(*lv.rhs8) : "") << '\n';
    }
    os << "sup_q1," << format_g17(er.sup_q1) << ",conclusion_le_half,"
       << (er.conclusion_le_half ? 1 : 0) << ",,,,\n";
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

void write_report_csvs(const SweepReport& rep, const ExperimentPlan& plan,
                       const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ofstream os(dir + "/holder_report.csv");
        os << "index,epsilon,block_cells,flip_sign,source_strength,refine,gamma,fit_residual,"
              "theory_gamma,degenerate,truncated,sup_u,max_gradient,dt_min,substeps,alpha_w,"
              "beta_w,error_code,error\n";
        for (const auto& po : rep.points) {
            const auto& pt = po.point;
            os << pt.index << ',' << format_g17(pt.epsilon) << ',' << pt.block_cells << ','
               << (pt.flip_sign ? 1 : 0) << ',' << format_g17(pt.source_strength) << ','
               << pt.refine << ',' << format_g17(po.osc.gamma) << ','
               << format_g17(po.osc.fit_residual) << ',' << format_g17(po.theory_gamma) << ','
               << (po.osc.degenerate ? 1 : 0) << ',' << (po.osc.truncated ? 1 : 0) << ','
               << format_g17(po.sup_u) << ',' << format_g17(po.meta.max_gradient) << ','
               << format_g17(po.meta.dt_min) << ',' << po.meta.total_substeps << ','
               << format_g17(po.norm.alpha_w) << ',' << format_g17(po.norm.beta_w) << ','
               << po.error_code << ',' << po.error << '\n';
        }
    }
    {
        std::ofstream os(dir + "/summary.csv");
        os << "axis,group,count,gamma_max,gamma_min,ratio\n";
        for (const auto& row : rep.summary)
            os << row.axis << ',' << row.group << ',' << row.count << ','
               << format_g17(row.gamma_max) << ',' << format_g17(row.gamma_min) << ','
               << format_g17(row.ratio) << '\n';
    }
    bool any_dg = false;
    for (const auto& po : rep.points) {
        if (po.error_code == 0 && !po.osc.levels.empty())
            write_osc_csv(po.osc, point_file(dir, po.point.index, "osc.csv"));
        for (size_t k = 0; k < po.extra_osc.size(); ++k)
            write_osc_csv(po.extra_osc[k],
                          point_file(dir, po.point.index, "osc_c" + std::to_string(k) + ".csv"));
        if (po.error_code == 0) {
            std::ofstream os(point_file(dir, po.point.index, "meta.kv"));
            os << po.meta.to_kv();
            os << "alpha_w=" << format_g17(po.norm.alpha_w) << '\n'
               << "beta_w=" << format_g17(po.norm.beta_w) << '\n'
               << "time_factor=" << format_g17(po.norm.time_factor) << '\n'
               << "t_center=" << format_g17(po.norm.t_center) << '\n';
            for (const auto& viol : po.violations) os << "violation=" << viol << '\n';
        }
        if (po.energy_report) {
            any_dg = true;
            write_energy_csv(*po.energy_report, point_file(dir, po.point.index, "energy.csv"));
            std::ofstream os(point_file(dir, po.point.index, "dg_levels.csv"));
            os << "k,below,between,above,meas_ge1\n";
            for (size_t k = 0; k < po.ladder.size(); ++k) {
                os << k << ',' << format_g17(po.ladder[k].below) << ','
                   << format_g17(po.ladder[k].between) << ',' << format_g17(po.ladder[k].above)
                   << ',' << format_g17(po.meas_ge1[k]) << '\n';
            }
        }
    }
    if (any_dg) {
        std::ofstream os(dir + "/dg_report.csv");
        os << "index,epsilon,block_cells,flip_sign,source_strength,refine,mostly_negative,"
              "negative_fraction,k0,first_below_delta0,sup_q1,conclusion_le_half,error_code,"
              "error\n";
        for (const auto& po : rep.points) {
            const auto& pt = po.point;
            os << pt.index << ',' << format_g17(pt.epsilon) << ',' << pt.block_cells << ','
               << (pt.flip_sign ? 1 : 0) << ',' << format_g17(pt.source_strength) << ','
               << pt.refine << ',' << (po.mostly_negative ? 1 : 0) << ','
               << format_g17(po.negative_fraction) << ',' << po.k0 << ','
               << (po.first_below_delta0 ? std::to_string(*po.first_below_delta0) : "") << ','
               << (po.energy_report ? format_g17(po.energy_report->sup_q1) : "") << ','
               << (po.energy_report ? (po.energy_report->conclusion_le_half ? "1" : "0") : "")
               << ',' << po.error_code << ',' << po.error << '\n';
        }
    }
    (void)plan;
}

void emit_plotdata(const SweepReport& rep, const std::string& dir) {
    fs::create_directories(dir);
    {
        std::ofstream os(dir + "/plot_eps_gamma.csv");
        os << "epsilon,gamma\n";
        for (const auto& po : rep.points)
            if (po.error_code == 0 && !po.osc.degenerate)
                os << format_g17(po.point.epsilon) << ',' << format_g17(po.osc.gamma) << '\n';
    }
    for (const auto& po : rep.points) {
        if (po.error_code == 0 && !po.osc.levels.empty()) {
            std::ofstream os(point_file(dir, po.point.index, "plot_osc.csv"));
            os << "log_scale,log_osc\n";
            for (const auto& lv : po.osc.levels)
                if (lv.osc > 0)
                    os << format_g17(std::log(lv.scale)) << ',' << format_g17(std::log(lv.osc))
                       << '\n';
            os << "fit," << format_g17(po.osc.gamma) << '\n';
        }
        if (po.energy_report) {
            std::ofstream os(point_file(dir, po.point.index, "plot_energy.csv"));
            os << "k,E_k\n";
            for (const auto& lv : po.energy_report->levels)
                os << lv.k << ',' << format_g17(lv.energy) << '\n';
        }
    }
}

FitResult<double> recompute_gamma_from_plot(const std::string& csv_path) {
    std::ifstream is(csv_path);
    if (!is) throw std::runtime_error("cannot open " + csv_path);
    std::string line;
    std::getline(is, line);  // header
    std::vector<double> xs, ys;
    while (std::getline(is, line)) {
        if (line.empty() || line.rfind("fit,", 0) == 0) continue;
        const auto f = split_csv(line);
        if (f.size() < 2) continue;
        xs.push_back(std::stod(f[0]));
        ys.push_back(std::stod(f[1]));
    }
    return fit_loglinear(xs, ys);
}

int rebuild_report(const std::string& dir) {
    std::ifstream is(dir + "/holder_report.csv");
    if (!is) throw std::runtime_error("no holder_report.csv under " + dir);
    std::string line;
    std::getline(is, line);  // header
    SweepReport rep;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() < 19) continue;
        PointOutcome po;
        po.point.index = std::stoi(f[0]);
        po.point.epsilon = std::stod(f[1]);
        po.point.block_cells = std::stoi(f[2]);
        po.point.flip_sign = f[3] == "1";
        po.point.source_strength = std::stod(f[4]);
        po.point.refine = std::stoi(f[5]);
        po.osc.gamma = std::stod(f[6]);
        po.osc.fit_residual = std::stod(f[7]);
        po.theory_gamma = std::stod(f[8]);
        po.osc.degenerate = f[9] == "1";
        po.osc.truncated = f[10] == "1";
        po.error_code = std::stoi(f[17]);
        // reload the per-level table when present
        std::ifstream osc_is(point_file(dir, po.point.index, "osc.csv"));
        if (osc_is) {
            std::string l2;
            std::getline(osc_is, l2);
            while (std::getline(osc_is, l2)) {
                if (l2.rfind("fit,", 0) == 0) continue;
                const auto g = split_csv(l2);
                if (g.size() < 4) continue;
                OscillationLevel<double> lv;
                lv.k = std::stoi(g[0]);
                lv.scale = std::stod(g[1]);
                lv.osc = std::stod(g[2]);
                lv.samples = std::stoll(g[3]);
                po.osc.levels.push_back(lv);
            }
        }
        rep.points.push_back(std::move(po));
    }
    build_summary(rep);
    {
        std::ofstream os(dir + "/summary.csv");
        os << "axis,group,count,gamma_max,gamma_min,ratio\n";
        for (const auto& row : rep.summary)
            os << row.axis << ',' << row.group << ',' << row.count << ','
               << format_g17(row.gamma_max) << ',' << format_g17(row.gamma_min) << ','
               << format_g17(row.ratio) << '\n';
    }
    emit_plotdata(rep, dir);
    return int(rep.points.size());
}

}  // namespace hjdg
