#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "hjdg/errors.hpp"
#include "hjdg/grid.hpp"
#include "hjdg/matrix_ops.hpp"
#include "hjdg/problem.hpp"
#include "hjdg/smoothstep.hpp"
#include "hjdg/solver.hpp"

namespace hjdg {

// ---------------------------------------------------------------------------
// truncation

/// Pointwise (u - c)_+.
template <typename Scalar>
GridField<Scalar> truncate(const GridField<Scalar>& u, Scalar c) {
    GridField<Scalar> out = u;
    out.values = (u.values - c).max(Scalar(0));
    return out;
}

/// u^b on nonnegative fields, with u^0 read as the indicator of {u > 0}.
template <typename Scalar>
inline Scalar pos_pow(Scalar u, Scalar b) {
    if (u <= Scalar(0)) return Scalar(0);
    if (b == Scalar(0)) return Scalar(1);
    if (b == Scalar(1)) return u;
    return std::pow(u, b);
}

// ---------------------------------------------------------------------------
// the truncation ladder of the first De Giorgi lemma

template <typename Scalar = double>
struct TruncationLadder {
    int k_max = 8;

    Scalar height(int k) const { return Scalar(0.5) - std::ldexp(Scalar(1), -k - 1); }  // C_k
    Scalar radius(int k) const { return Scalar(1) + std::ldexp(Scalar(1), -k); }        // B^k
    Scalar time(int k) const { return Scalar(-1) - std::ldexp(Scalar(1), -k); }         // T_k
    Scalar gradient_bound(int k) const { return std::ldexp(Scalar(4), k); }             // 4*2^k
};

// ---------------------------------------------------------------------------
// cutoffs

/// Radial C^2 cutoff: 1 on the plateau, 0 outside the support, quintic
/// smoothstep in between.  Exact derivative bounds come with the profile.
template <typename Scalar = double>
struct RadialCutoff {
    VectorX<Scalar> center;
    Scalar support_radius = Scalar(2);
    Scalar plateau_radius = Scalar(1);
    Scalar gradient_bound = Scalar(4);

    Scalar value(Scalar r) const {
        if (r <= plateau_radius) return Scalar(1);
        if (r >= support_radius) return Scalar(0);
        return Scalar(1) -
               smoothstep((r - plateau_radius) / (support_radius - plateau_radius));
    }
    Scalar deriv(Scalar r) const {
        if (r <= plateau_radius || r >= support_radius) return Scalar(0);
        const Scalar w = support_radius - plateau_radius;
        return -smoothstep_d1((r - plateau_radius) / w) / w;
    }
    Scalar value_at(const VectorX<Scalar>& x) const { return value((x - center).norm()); }
    VectorX<Scalar> grad_at(const VectorX<Scalar>& x) const {
        const Scalar r = (x - center).norm();
        if (r <= plateau_radius || r >= support_radius || r == Scalar(0))
            return VectorX<Scalar>::Zero(center.size());
        return deriv(r) / r * (x - center);
    }
    /// Exact sup of |grad phi| for the quintic profile.
    Scalar max_abs_gradient() const {
        return smoothstep_max_slope<Scalar>() / (support_radius - plateau_radius);
    }

    ArrayX<Scalar> sample(const SpaceTimeGrid<Scalar>& g) const {
        ArrayX<Scalar> out(g.cells_total());
        for (Index c = 0; c < g.cells_total(); ++c) out[c] = value((g.point(c) - center).norm());
        return out;
    }
    ArrayX<Scalar> sample_grad_sq(const SpaceTimeGrid<Scalar>& g) const {
        ArrayX<Scalar> out(g.cells_total());
        for (Index c = 0; c < g.cells_total(); ++c) {
            const Scalar d = deriv((g.point(c) - center).norm());
            out[c] = d * d;
        }
        return out;
    }
};

template <typename Scalar>
RadialCutoff<Scalar> cutoff(Scalar support_radius, Scalar plateau_radius, Scalar gradient_bound,
                            VectorX<Scalar> center) {
    if (!(plateau_radius < support_radius))
        throw std::invalid_argument("cutoff: plateau must be smaller than support");
    const Scalar needed = smoothstep_max_slope<Scalar>() / (support_radius - plateau_radius);
    if (gradient_bound < needed)
        throw std::invalid_argument("cutoff: infeasible gradient bound");
    return RadialCutoff<Scalar>{std::move(center), support_radius, plateau_radius, gradient_bound};
}

template <typename Scalar>
RadialCutoff<Scalar> cutoff(int dim, Scalar support_radius, Scalar plateau_radius,
                            Scalar gradient_bound) {
    VectorX<Scalar> c = VectorX<Scalar>::Zero(dim);
    return cutoff(support_radius, plateau_radius, gradient_bound, std::move(c));
}

// ---------------------------------------------------------------------------
// energies

/// sup_{t in [t_lo, t_hi]} int phi^2 u*^(b+1)  +  iint phi^2 u*^b |grad u*|^p
/// with u* = (u-c)_+ and the Godunov gradient magnitude.
template <typename Scalar>
Scalar energy(const GridField<Scalar>& u, Scalar c, Scalar b, Scalar p,
              const RadialCutoff<Scalar>& phi, Scalar t_lo, Scalar t_hi = Scalar(0)) {
    if (b < Scalar(0)) throw std::invalid_argument("energy: requires b >= 0");
    const auto& g = u.grid;
    const Scalar hn = std::pow(g.h, Scalar(g.dim));
    const ArrayX<Scalar> phi2 = phi.sample(g).square();

    Scalar sup_term = 0, grad_term = 0;
    for (int j : slices_in_interval(g, t_lo, t_hi)) {
        const ArrayX<Scalar> ustar = (u.slice(j) - c).max(Scalar(0));
        Scalar t1 = 0;
        for (Index i = 0; i < ustar.size(); ++i)
            if (phi2[i] > Scalar(0)) t1 += phi2[i] * pos_pow(ustar[i], b + Scalar(1));
        sup_term = std::max(sup_term, t1 * hn);

        const ArrayX<Scalar> s_sq = upwind_gradient_sq(g, ustar);
        Scalar t2 = 0;
        for (Index i = 0; i < ustar.size(); ++i)
            if (phi2[i] > Scalar(0) && ustar[i] > Scalar(0))
                t2 += phi2[i] * pos_pow(ustar[i], b) * pow_from_sq(s_sq[i], p);
        grad_term += t2 * hn;
    }
    return sup_term + grad_term * g.dt;
}

template <typename Scalar = double>
struct EnergySides {
    Scalar lhs = 0;    // sup term + gradient term over [T, 0]
    Scalar rhs6 = 0;   // first form (valid for every b)
    std::optional<Scalar> rhs7;  // second form, needs b > sigma
    struct Form8 {
        Scalar bracket = 0;    // int phi^2 u*^(b+1) (0) - same at S
        Scalar grad_term = 0;  // iint_S^0 phi^2 u*^b |grad u*|^p
        Scalar rhs = 0;        // iint phi^2 u*^b f + u*^(b+1)|grad phi|^2 + phi^2 u*^(b-sigma)
    };
    std::optional<Form8> form8;  // third form, needs b > sigma
    Scalar sigma = 0;
    Scalar m_star = 0;
};

/// Raw sides of the three energy-inequality forms; callers test
/// LHS <= C * RHS for a fitted constant.  `source` feeds the f-term of the
/// third form and may be null.
template <typename Scalar>
EnergySides<Scalar> energy_inequality_sides(const GridField<Scalar>& u, Scalar p, Scalar m,
                                            const SourceSpec<Scalar>* source, Scalar c, Scalar b,
                                            const RadialCutoff<Scalar>& phi, Scalar S, Scalar T) {
    if (!(S < T && T < Scalar(0)))
        throw std::invalid_argument("energy_inequality_sides: need S < T < 0");
    const auto& g = u.grid;
    const Scalar sigma = Scalar(1) / (Scalar(1) - Scalar(2) / p);
    const Scalar m_star = m_conjugate(m);
    const Scalar hn = std::pow(g.h, Scalar(g.dim));

    EnergySides<Scalar> out;
    out.sigma = sigma;
    out.m_star = m_star;
    out.lhs = energy(u, c, b, p, phi, T, Scalar(0));

    const ArrayX<Scalar> phiv = phi.sample(g);
    const ArrayX<Scalar> phi2 = phiv.square();
    const ArrayX<Scalar> gphi2 = phi.sample_grad_sq(g);

    // integrals over [S, 0]
    Scalar i_b1 = 0, i_grad = 0, i_mstar = 0, i_sigma = 0;
    const auto window = slices_in_interval(g, S, Scalar(0));
    for (int j : window) {
        const ArrayX<Scalar> ustar = (u.slice(j) - c).max(Scalar(0));
        const ArrayX<Scalar> s_sq = upwind_gradient_sq(g, ustar);
        for (Index i = 0; i < ustar.size(); ++i) {
            if (phiv[i] <= Scalar(0)) continue;  // indicator of supp(phi)
            const Scalar us = ustar[i];
            i_b1 += pos_pow(us, b + Scalar(1));
            i_mstar += pos_pow(us, b * m_star);
            if (us > Scalar(0)) {
                i_grad += pos_pow(us, b - Scalar(1)) * s_sq[i];
                i_sigma += pos_pow(us, b - sigma);
            }
        }
    }
    const Scalar dv = g.dt * hn;
    i_b1 *= dv;
    i_grad *= dv;
    i_mstar *= dv;
    i_sigma *= dv;

    const Scalar gsup = phi.max_abs_gradient();
    const Scalar factor = (Scalar(1) + Scalar(1) / (T - S)) * (Scalar(1) + gsup * gsup);
    const Scalar holder = std::pow(i_mstar, Scalar(1) / m_star);
    out.rhs6 = factor * (i_b1 + i_grad + holder);
    if (b > sigma) {
        out.rhs7 = factor * (i_b1 + i_sigma + holder);

        typename EnergySides<Scalar>::Form8 f8;
        // bracket term of the time pairing for time-independent phi
        auto slice_weighted = [&](int j) {
            const ArrayX<Scalar> ustar = (u.slice(j) - c).max(Scalar(0));
            Scalar acc = 0;
            for (Index i = 0; i < ustar.size(); ++i)
                if (phi2[i] > Scalar(0)) acc += phi2[i] * pos_pow(ustar[i], b + Scalar(1));
            return acc * hn;
        };
        f8.bracket = slice_weighted(window.back()) - slice_weighted(window.front());

        Scalar grad_term = 0, rhs = 0;
        for (int j : window) {
            const ArrayX<Scalar> ustar = (u.slice(j) - c).max(Scalar(0));
            const ArrayX<Scalar> s_sq = upwind_gradient_sq(g, ustar);
            for (Index i = 0; i < ustar.size(); ++i) {
                const Scalar us = ustar[i];
                if (us <= Scalar(0)) continue;
                if (phi2[i] > Scalar(0))
                    grad_term += phi2[i] * pos_pow(us, b) * pow_from_sq(s_sq[i], p);
                const Scalar f = source ? source->value_at(g, j, i) : Scalar(0);
                rhs += phi2[i] * pos_pow(us, b) * f + pos_pow(us, b + Scalar(1)) * gphi2[i] +
                       phi2[i] * pos_pow(us, b - sigma);
            }
        }
        f8.grad_term = grad_term * dv;
        f8.rhs = rhs * dv;
        out.form8 = f8;
    }
    return out;
}

// ---------------------------------------------------------------------------
// level sets and interstitial measure

/// dt * h^n * #{ samples in cyl with u > threshold }.
template <typename Scalar>
Scalar levelset_measure(const GridField<Scalar>& u, Scalar threshold,
                        const ParabolicCylinder<Scalar>& cyl) {
    const auto cells = cells_in_ball(u.grid, cyl.ball());
    long long count = 0;
    for (int j : slices_in_interval(u.grid, cyl.t_lo, cyl.t_hi)) {
        const auto s = u.slice(j);
        for (Index c : cells)
            if (s[c] > threshold) ++count;
    }
    return Scalar(count) * u.grid.dt * std::pow(u.grid.h, Scalar(u.grid.dim));
}

template <typename Scalar = double>
struct InterstitialMeasure {
    Scalar below = 0;    // |{u <= 0} ∩ Q2|
    Scalar between = 0;  // |{0 < u < 1} ∩ Q2|
    Scalar above = 0;    // |{u >= 1} ∩ Q2_bar|
};

template <typename Scalar>
InterstitialMeasure<Scalar> interstitial_measure(const GridField<Scalar>& u) {
    const auto& g = u.grid;
    const int n = g.dim;
    // the field must cover Q3
    const Scalar slack = Scalar(1e-9);
    bool covers = g.t_start <= Scalar(-4) + slack && g.t_end >= Scalar(0) - slack;
    for (int d = 0; d < n && covers; ++d)
        covers = g.domain_low(d) <= Scalar(-3) + slack && g.domain_high(d) >= Scalar(3) - slack;
    if (!covers) throw HypothesisError("interstitial_measure: field is not defined on Q3");

    const Scalar dv = g.dt * std::pow(g.h, Scalar(n));
    InterstitialMeasure<Scalar> out;
    const auto q2 = ParabolicCylinder<Scalar>::q2(n);
    const auto cells2 = cells_in_ball(g, q2.ball());
    long long below = 0, between = 0;
    for (int j : slices_in_interval(g, q2.t_lo, q2.t_hi)) {
        const auto s = u.slice(j);
        for (Index c : cells2) {
            if (s[c] <= Scalar(0)) ++below;
            else if (s[c] < Scalar(1)) ++between;
        }
    }
    out.below = Scalar(below) * dv;
    out.between = Scalar(between) * dv;

    const auto q2b = ParabolicCylinder<Scalar>::q2_bar(n);
    long long above = 0;
    for (int j : slices_in_interval(g, q2b.t_lo, q2b.t_hi)) {
        const auto s = u.slice(j);
        for (Index c : cells2)
            if (s[c] >= Scalar(1)) ++above;
    }
    out.above = Scalar(above) * dv;
    return out;
}

// ---------------------------------------------------------------------------
// DG1 configuration and iteration

template <typename Scalar = double>
struct DG1Config {
    Scalar p = 3, m = 2;
    int n = 1;
    Scalar b = 1;
    Scalar beta = 1;      // Sobolev window parameter, 1 when n = 1
    Scalar p_prime = 3;   // 1/p' = beta/2 + 1/p - 1/n for n > 1, else p
    Scalar q = 2;         // q = p + (1 - p/p') * 2/(1+beta)
    Scalar sigma = 3;     // (1 - 2/p)^-1
    Scalar m_star = 2;
};

template <typename Scalar>
DG1Config<Scalar> dg1_config(Scalar p, Scalar m, int n, Scalar b = Scalar(1),
                             std::optional<Scalar> beta = std::nullopt) {
    if (!(p > Scalar(2))) throw std::invalid_argument("dg1_config: requires p > 2");
    DG1Config<Scalar> cfg;
    cfg.p = p;
    cfg.m = m;
    cfg.n = n;
    cfg.b = b;
    cfg.sigma = Scalar(1) / (Scalar(1) - Scalar(2) / p);
    cfg.m_star = m_conjugate(m);
    if (n == 1) {
        cfg.beta = Scalar(1);
        cfg.p_prime = p;
    } else {
        const Scalar lo = std::max(Scalar(0), Scalar(2) / Scalar(n) - Scalar(2) / p);
        const Scalar hi = std::min(Scalar(2) / Scalar(n), Scalar(1));
        if (!(lo < hi)) throw std::invalid_argument("dg1_config: empty beta window");
        cfg.beta = beta.value_or(Scalar(0.5) * (lo + hi));
        const Scalar gap = Scalar(1) / Scalar(n) - cfg.beta / Scalar(2);
        if (!(gap > Scalar(0) && gap < Scalar(1) / p))
            throw std::invalid_argument("dg1_config: beta violates 0 < 1/n - beta/2 < 1/p");
        cfg.p_prime = Scalar(1) / (cfg.beta / Scalar(2) + Scalar(1) / p - Scalar(1) / Scalar(n));
    }
    cfg.q = p + (Scalar(1) - p / cfg.p_prime) * Scalar(2) / (Scalar(1) + cfg.beta);
    return cfg;
}

template <typename Scalar = double>
struct EnergyLevel {
    int k = 0;
    Scalar height = 0;   // C_k
    Scalar measure = 0;  // |{u_k > 0}| over [T_k, 0] x B^k
    Scalar energy = 0;   // E_k
    Scalar lhs = 0, rhs6 = 0;
    std::optional<Scalar> rhs7, rhs8;
};

template <typename Scalar = double>
struct EnergyReport {
    std::vector<EnergyLevel<Scalar>> levels;
    Scalar sup_q1 = 0;
    bool conclusion_le_half = false;  // sup_{Q1} u <= 1/2
};

/// The full truncation ladder of the first De Giorgi lemma.  Requires
/// u <= 1 on Q2_bar; the ladder heights, radii, times and cutoffs follow
/// the canonical dyadic sequences.
template <typename Scalar>
EnergyReport<Scalar> dg1_iterate(const GridField<Scalar>& u, const DG1Config<Scalar>& cfg,
                                 const TruncationLadder<Scalar>& ladder,
                                 const SourceSpec<Scalar>* source = nullptr) {
    const int n = u.grid.dim;
    const auto q2b = ParabolicCylinder<Scalar>::q2_bar(n);
    const auto [sup2, inf2] = sup_inf_on(u, q2b);
    if (sup2 > Scalar(1) + Scalar(1e-12))
        throw HypothesisError("dg1_iterate: u exceeds 1 on Q2_bar (sup = " +
                              std::to_string(double(sup2)) + ")");

    EnergyReport<Scalar> rep;
    for (int k = 0; k <= ladder.k_max; ++k) {
        EnergyLevel<Scalar> lv;
        lv.k = k;
        lv.height = ladder.height(k);
        const auto phi = cutoff(n, ladder.radius(k), ladder.radius(k + 1), ladder.gradient_bound(k));
        lv.energy = energy(u, lv.height, cfg.b, cfg.p, phi, ladder.time(k + 1), Scalar(0));
        lv.lhs = lv.energy;
        const auto cyl = ParabolicCylinder<Scalar>::make_origin(n, ladder.time(k), Scalar(0),
                                                                ladder.radius(k));
        lv.measure = levelset_measure(u, lv.height, cyl);
        const auto sides = energy_inequality_sides(u, cfg.p, cfg.m, source, lv.height, cfg.b, phi,
                                                   ladder.time(k), ladder.time(k + 1));
        lv.rhs6 = sides.rhs6;
        if (sides.rhs7) lv.rhs7 = *sides.rhs7;
        if (sides.form8) lv.rhs8 = sides.form8->rhs;
        rep.levels.push_back(std::move(lv));
    }
    const auto [sup1, inf1] = sup_inf_on(u, ParabolicCylinder<Scalar>::q1(n));
    rep.sup_q1 = sup1;
    rep.conclusion_le_half = sup1 <= Scalar(0.5);
    return rep;
}

// ---------------------------------------------------------------------------
// oscillation profile

template <typename Scalar = double>
struct FitResult {
    Scalar gamma = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar residual = std::numeric_limits<Scalar>::quiet_NaN();
    bool ok = false;
};

/// Least-squares line through already-logged data; residual is the RMS
/// misfit.
template <typename Scalar>
FitResult<Scalar> fit_loglinear(const std::vector<Scalar>& xs, const std::vector<Scalar>& ys) {
    FitResult<Scalar> out;
    if (xs.size() < 2 || xs.size() != ys.size()) return out;
    const Scalar n = Scalar(xs.size());
    Scalar mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= n;
    my /= n;
    Scalar sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= Scalar(0)) return out;
    out.gamma = sxy / sxx;
    Scalar rss = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const Scalar e = ys[i] - (my + out.gamma * (xs[i] - mx));
        rss += e * e;
    }
    out.residual = std::sqrt(rss / n);
    out.ok = true;
    return out;
}

/// Least-squares slope of log(osc) against log(scale) over the levels with
/// positive oscillation; residual is the RMS misfit in log space.
template <typename Scalar>
FitResult<Scalar> fit_gamma(const std::vector<Scalar>& scales, const std::vector<Scalar>& oscs) {
    std::vector<Scalar> xs, ys;
    for (size_t i = 0; i < scales.size() && i < oscs.size(); ++i) {
        if (oscs[i] > Scalar(0) && scales[i] > Scalar(0)) {
            xs.push_back(std::log(scales[i]));
            ys.push_back(std::log(oscs[i]));
        }
    }
    return fit_loglinear(xs, ys);
}

template <typename Scalar = double>
struct OscillationLevel {
    int k = 0;
    Scalar time_depth = 0;  // (alpha1^(p-1) beta1^p)^k
    Scalar radius = 0;      // beta1^k
    Scalar scale = 0;       // max(time_depth, radius)
    Scalar osc = 0;
    Index samples = 0;
};

template <typename Scalar = double>
struct OscillationProfile {
    Scalar alpha1 = 0, beta1 = 0, p = 0;
    std::vector<OscillationLevel<Scalar>> levels;
    Scalar gamma = std::numeric_limits<Scalar>::quiet_NaN();
    Scalar fit_residual = std::numeric_limits<Scalar>::quiet_NaN();
    bool degenerate = true;
    bool truncated = false;  // ran out of samples before k_max
    int requested_k_max = 0;
};

/// Oscillation over the dyadic cylinders Q_k = [-(a1^(p-1) b1^p)^k, 0] x
/// B_{b1^k}, anchored at (t_top, x_center), plus the fitted decay exponent.
template <typename Scalar>
OscillationProfile<Scalar> oscillation_profile(const GridField<Scalar>& u, Scalar alpha1,
                                               Scalar beta1, Scalar p, int k_max,
                                               Scalar t_top = Scalar(0),
                                               std::optional<VectorX<Scalar>> x_center = {}) {
    if (!(alpha1 > Scalar(1)) || !(beta1 > Scalar(0)) || !(beta1 < Scalar(1)))
        throw std::invalid_argument("oscillation_profile: need alpha1 > 1, beta1 in (0,1)");
    const auto& g = u.grid;
    const VectorX<Scalar> xc = x_center.value_or(VectorX<Scalar>::Zero(g.dim));
    const Scalar shrink = std::pow(alpha1, p - Scalar(1)) * std::pow(beta1, p);

    OscillationProfile<Scalar> out;
    out.alpha1 = alpha1;
    out.beta1 = beta1;
    out.p = p;
    out.requested_k_max = k_max;

    std::vector<Scalar> scales, oscs;
    for (int k = 0; k <= k_max; ++k) {
        OscillationLevel<Scalar> lv;
        lv.k = k;
        lv.time_depth = std::pow(shrink, Scalar(k));
        lv.radius = std::pow(beta1, Scalar(k));
        lv.scale = std::max(lv.time_depth, lv.radius);
        const auto cyl =
            ParabolicCylinder<Scalar>::make(t_top - lv.time_depth, t_top, lv.radius, xc);
        lv.samples = samples_in(g, cyl);
        if (lv.samples < 8) {
            out.truncated = true;
            break;
        }
        const auto [hi, lo] = sup_inf_on(u, cyl);
        lv.osc = hi - lo;
        scales.push_back(lv.scale);
        oscs.push_back(lv.osc);
        out.levels.push_back(lv);
    }
    const auto fit = fit_gamma(scales, oscs);
    out.gamma = fit.gamma;
    out.fit_residual = fit.residual;
    out.degenerate = !fit.ok;
    return out;
}

// ---------------------------------------------------------------------------
// majority classification and level transforms

template <typename Scalar = double>
struct MajorityResult {
    bool mostly_negative = true;
    Scalar negative_fraction = 1;
    GridField<Scalar> v;  // rescaled (and reflected+negated when mostly positive)
};

/// Split on the sign majority over q_small and rescale onto a grid covering
/// Q3.  q_small is [-4 s_t, 0] x B_{2 s_x}; the rescale factors s_t, s_x are
/// read off the cylinder.  Ties count as mostly negative.
template <typename Scalar>
MajorityResult<Scalar> classify_majority(const GridField<Scalar>& u,
                                         const ParabolicCylinder<Scalar>& q_small) {
    const auto& g = u.grid;
    const Scalar s_t = -q_small.t_lo / Scalar(4);
    const Scalar s_x = q_small.radius / Scalar(2);

    const auto cells = cells_in_ball(g, q_small.ball());
    long long neg = 0, total = 0;
    for (int j : slices_in_interval(g, q_small.t_lo, q_small.t_hi)) {
        const auto s = u.slice(j);
        for (Index c : cells) {
            ++total;
            if (s[c] <= Scalar(0)) ++neg;
        }
    }
    MajorityResult<Scalar> out;
    out.negative_fraction = total ? Scalar(neg) / Scalar(total) : Scalar(1);
    out.mostly_negative = (2 * neg >= total);

    // target grid covering Q3 at the induced resolution, capped
    const int cells_t = std::clamp(int(std::ceil(Scalar(6) * s_x / g.h)), 8, 2048);
    int steps_t = std::clamp(int(std::ceil(Scalar(4) * s_t / g.dt)), 8, 2048);
    const Scalar h_t = Scalar(6) / Scalar(cells_t);
    const Scalar dt_t = Scalar(4) / Scalar(steps_t);
    auto target = SpaceTimeGrid<Scalar>::centered_cube(g.dim, cells_t, h_t, dt_t, Scalar(-4),
                                                       Scalar(0));

    AffineMap<Scalar> map = AffineMap<Scalar>::identity(g.dim);
    map.x_scale = s_x;
    if (out.mostly_negative) {
        map.t_scale = s_t;
        out.v = resample(u, target, map);
    } else {
        map.t_scale = -s_t;
        map.t_offset = Scalar(-4) * s_t;
        out.v = resample(u, target, map);
        out.v.values = -out.v.values;
    }
    return out;
}

/// Smallest integer strictly greater than q2_measure / mu0.
template <typename Scalar>
int k0_levels(Scalar mu0, Scalar q2_measure) {
    if (!(mu0 > Scalar(0))) throw std::invalid_argument("k0_levels: mu0 must be positive");
    return int(std::floor(double(q2_measure / mu0))) + 1;
}

}  // namespace hjdg
