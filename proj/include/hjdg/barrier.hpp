#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>

#include "hjdg/errors.hpp"
#include "hjdg/grid.hpp"
#include "hjdg/smoothstep.hpp"
#include "hjdg/solver.hpp"

namespace hjdg {

/// Radial bump: 1 on [0, 1/2], quintic smoothstep down to 0 at 1, 0 beyond.
/// Derivative suprema are exact constants of the profile:
///   sup|b'| = (15/8)*2 = 15/4,  sup|b''| = (10/sqrt 3)*4.
template <typename Scalar = double>
struct BumpProfile {
    Scalar value(Scalar r) const {
        if (r <= Scalar(0.5)) return Scalar(1);
        if (r >= Scalar(1)) return Scalar(0);
        return Scalar(1) - smoothstep(Scalar(2) * (r - Scalar(0.5)));
    }
    Scalar d1(Scalar r) const {
        if (r <= Scalar(0.5) || r >= Scalar(1)) return Scalar(0);
        return Scalar(-2) * smoothstep_d1(Scalar(2) * (r - Scalar(0.5)));
    }
    Scalar d2(Scalar r) const {
        if (r <= Scalar(0.5) || r >= Scalar(1)) return Scalar(0);
        return Scalar(-4) * smoothstep_d2(Scalar(2) * (r - Scalar(0.5)));
    }
    Scalar max_abs_d1() const { return Scalar(2) * smoothstep_max_slope<Scalar>(); }
    Scalar max_abs_d2() const { return Scalar(4) * smoothstep_max_curvature<Scalar>(); }
};

template <typename Scalar = double>
struct BarrierSpec {
    Scalar lambda = Scalar(0.001);   // the barrier scale, in (0, K0]
    Scalar lambda0 = Scalar(0);      // Lambda_0
    Scalar Lambda = Scalar(1);
    Scalar p = Scalar(3);
    BumpProfile<Scalar> profile;
    Scalar K0 = Scalar(0.001);

    static BarrierSpec make(Scalar lambda, Scalar lambda0, Scalar Lambda, Scalar p, Scalar K0) {
        if (!(lambda > Scalar(0) && lambda <= K0 && K0 <= Scalar(1)))
            throw HypothesisError("barrier: need 0 < lambda <= K0 <= 1");
        if (lambda0 > lambda * lambda * K0 + Scalar(1e-15))
            throw HypothesisError("barrier: need Lambda_0 <= lambda^2 K0");
        BarrierSpec b;
        b.lambda = lambda;
        b.lambda0 = lambda0;
        b.Lambda = Lambda;
        b.p = p;
        b.K0 = K0;
        return b;
    }
};

/// sigma(t, x) = -2 + lambda^2 b(|x|/lambda) - (lambda^2/8) t, for t >= 0.
template <typename Scalar>
Scalar barrier_value(const BarrierSpec<Scalar>& spec, Scalar t, const VectorX<Scalar>& x) {
    const Scalar l2 = spec.lambda * spec.lambda;
    return Scalar(-2) + l2 * spec.profile.value(x.norm() / spec.lambda) - l2 / Scalar(8) * t;
}

template <typename Scalar>
Scalar barrier_value_radial(const BarrierSpec<Scalar>& spec, Scalar t, Scalar r) {
    const Scalar l2 = spec.lambda * spec.lambda;
    return Scalar(-2) + l2 * spec.profile.value(r / spec.lambda) - l2 / Scalar(8) * t;
}

/// Subsolution residual of the barrier from its closed-form derivatives:
///   d_t sigma + Lambda |grad sigma|^p - Lambda_0 m^-(D^2 sigma).
/// The Hessian eigenvalues are b''(r/lambda) once and (lambda/r) b'(r/lambda)
/// with multiplicity n-1; on the plateau and outside the support everything
/// spatial vanishes and the residual is -lambda^2/8.
template <typename Scalar>
Scalar barrier_residual(const BarrierSpec<Scalar>& spec, int dim, Scalar r) {
    const Scalar l = spec.lambda;
    const Scalar dt_term = -l * l / Scalar(8);
    const Scalar s = r / l;
    if (s <= Scalar(0.5) || s >= Scalar(1)) return dt_term;

    const Scalar b1 = spec.profile.d1(s);
    const Scalar b2 = spec.profile.d2(s);
    const Scalar grad_mag = l * std::abs(b1);
    Scalar lowest = std::min(b2, Scalar(0));
    if (dim > 1) lowest = std::min(lowest, (l / r) * b1);
    return dt_term + spec.Lambda * std::pow(grad_mag, spec.p) - spec.lambda0 * lowest;
}

template <typename Scalar>
Scalar barrier_residual(const BarrierSpec<Scalar>& spec, Scalar /*t*/, const VectorX<Scalar>& x) {
    return barrier_residual(spec, int(x.size()), x.norm());
}

/// The smallness display whose negativity makes the barrier a subsolution:
///   Lambda K^(p-2) |b'|^p + K |b''| + 2 K^2 (n-1) |b'| - 1/8.
template <typename Scalar>
Scalar k0_display(Scalar K, Scalar Lambda, Scalar p, int n, const BumpProfile<Scalar>& prof) {
    const Scalar b1 = prof.max_abs_d1();
    const Scalar b2 = prof.max_abs_d2();
    return Lambda * std::pow(K, p - Scalar(2)) * std::pow(b1, p) + K * b2 +
           Scalar(2) * K * K * Scalar(n - 1) * b1 - Scalar(1) / Scalar(8);
}

/// Largest K0 on a bisection lattice (tolerance 1e-6) with display <= -1e-9,
/// capped at 1.  The display is increasing in K, so bisection applies.
template <typename Scalar>
Scalar k0_search(Scalar Lambda, Scalar p, int n, const BumpProfile<Scalar>& prof) {
    if (!(p > Scalar(2))) throw std::invalid_argument("k0_search: requires p > 2");
    const Scalar target = Scalar(-1e-9);
    Scalar lo = Scalar(1e-12), hi = Scalar(1);
    if (k0_display(lo, Lambda, p, n, prof) > target)
        throw std::runtime_error("k0_search: no admissible K0 above 1e-12");
    if (k0_display(hi, Lambda, p, n, prof) <= target) return hi;
    while (hi - lo > Scalar(1e-6)) {
        const Scalar mid = Scalar(0.5) * (lo + hi);
        if (k0_display(mid, Lambda, p, n, prof) <= target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

// ---------------------------------------------------------------------------
// discrete comparison against the barrier

template <typename Scalar = double>
struct ComparisonReport {
    bool hypotheses_ok = false;
    std::string failed_hypothesis;   // which one, when not ok
    Scalar hypothesis_margin = 0;    // worst slack of the checked hypotheses
    bool boundary_dominates = false; // sigma <= u on the parabolic boundary samples
    Scalar boundary_margin = 0;      // min (u - sigma) over those samples
    Scalar min_margin = 0;           // min over [0,T] x B_{lambda/2} of u + 2 - lambda^2/2
    Scalar tolerance = 0;            // h + dt
    bool pass = false;               // min_margin >= -tolerance, hypotheses held
};

/// Verify the flow-forward conclusion on a computed field living on
/// [0, T] x B_2 (forward time):  hypotheses u >= -2 on [0,T] x B_2 and
/// u >= -2 + lambda^2 on {0} x B_lambda, conclusion
/// u >= -2 + lambda^2/2 on [0,T] x B_{lambda/2}.
template <typename Scalar>
ComparisonReport<Scalar> comparison_check(const GridField<Scalar>& u,
                                          const BarrierSpec<Scalar>& spec, Scalar T) {
    const auto& g = u.grid;
    if (!(T < Scalar(4))) throw HypothesisError("comparison_check: requires T < 4");
    if (g.t_start > Scalar(1e-12) || g.t_end < T - Scalar(1e-12))
        throw HypothesisError("comparison_check: field does not cover [0, T]");

    ComparisonReport<Scalar> rep;
    rep.tolerance = g.h + g.dt;
    const Scalar l = spec.lambda;
    const Scalar l2 = l * l;
    const Scalar eps = Scalar(1e-12);

    const auto slices = slices_in_interval(g, Scalar(0), T);
    const auto b2 = cells_in_ball(g, Ball<Scalar>::origin(g.dim, Scalar(2)));

    // hypothesis 1: u >= -2 on [0,T] x B2
    Scalar worst1 = std::numeric_limits<Scalar>::infinity();
    for (int j : slices) {
        const auto s = u.slice(j);
        for (Index c : b2) worst1 = std::min(worst1, s[c] + Scalar(2));
    }
    // hypothesis 2: u >= -2 + lambda^2 on {0} x B_lambda
    Scalar worst2 = std::numeric_limits<Scalar>::infinity();
    {
        const auto bl = cells_in_ball(g, Ball<Scalar>::origin(g.dim, l));
        if (bl.empty())
            throw HypothesisError("comparison_check: B_lambda holds no grid samples; refine h");
        const auto s0 = u.slice(slices.front());
        for (Index c : bl) worst2 = std::min(worst2, s0[c] + Scalar(2) - l2);
    }
    rep.hypothesis_margin = std::min(worst1, worst2);
    if (worst1 < -eps) {
        rep.failed_hypothesis = "u >= -2 on [0,T] x B2";
        return rep;
    }
    if (worst2 < -eps) {
        rep.failed_hypothesis = "u >= -2 + lambda^2 on {0} x B_lambda";
        return rep;
    }
    rep.hypotheses_ok = true;

    // barrier below u on the parabolic boundary samples
    Scalar bmargin = std::numeric_limits<Scalar>::infinity();
    {
        const auto s0 = u.slice(slices.front());
        for (Index c : b2) {
            const Scalar sig = barrier_value_radial(spec, Scalar(0), g.point(c).norm());
            bmargin = std::min(bmargin, s0[c] - sig);
        }
        for (int j : slices) {
            const auto s = u.slice(j);
            const Scalar t = g.time_at(j);
            for (Index c : b2) {
                const Scalar r = g.point(c).norm();
                if (r < Scalar(2) - g.h) continue;  // outermost ring inside B2
                bmargin = std::min(bmargin, s[c] - barrier_value_radial(spec, t, r));
            }
        }
    }
    rep.boundary_margin = bmargin;
    rep.boundary_dominates = bmargin >= -eps;

    // conclusion margin over [0,T] x B_{lambda/2}
    const auto core = cells_in_ball(g, Ball<Scalar>::origin(g.dim, l / Scalar(2)));
    if (core.empty())
        throw HypothesisError("comparison_check: B_{lambda/2} holds no grid samples; refine h");
    Scalar margin = std::numeric_limits<Scalar>::infinity();
    for (int j : slices) {
        const auto s = u.slice(j);
        for (Index c : core) margin = std::min(margin, s[c] + Scalar(2) - l2 / Scalar(2));
    }
    rep.min_margin = margin;
    rep.pass = rep.hypotheses_ok && margin >= -rep.tolerance;
    return rep;
}

}  // namespace hjdg
