#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>

#include "hjdg/errors.hpp"
#include "hjdg/grid.hpp"
#include "hjdg/problem.hpp"

namespace hjdg {

template <typename Scalar = double>
struct ScalingExponents {
    Scalar e1 = 0;  // in (max(2, n/(m-1)), p)
    Scalar e2 = 0;  // max(-(p-e1)/(p-1), n/m - e1 (m-1)/m), negative
    Scalar p = 0, m = 0;
    int n = 1;
};

/// e1 at the midpoint of its admissible interval, e2 by the max formula.
template <typename Scalar>
ScalingExponents<Scalar> compute_exponents(Scalar p, Scalar m, int n) {
    const Scalar lo = std::max(Scalar(2), Scalar(n) / (m - Scalar(1)));
    if (!(m > Scalar(1)) || !(lo < p))
        throw HypothesisError("compute_exponents: empty interval for e1 (need m > 1 + max(n,2)/p)");
    ScalingExponents<Scalar> e;
    e.p = p;
    e.m = m;
    e.n = n;
    e.e1 = Scalar(0.5) * (lo + p);
    e.e2 = std::max(-(p - e.e1) / (p - Scalar(1)),
                    Scalar(n) / m - e.e1 * (m - Scalar(1)) / m);
    if (!(e.e2 < Scalar(0)))
        throw HypothesisError("compute_exponents: e2 is not negative");
    return e;
}

enum class ScaleMode { Lemma61, Lemma62 };

template <typename Scalar = double>
struct ScaleParams {
    Scalar alpha = 1;
    Scalar beta = 1;
    ScaleMode mode = ScaleMode::Lemma61;
    // sampling anchor; defaults to (t_end, domain center) of the source grid
    std::optional<Scalar> t_anchor;
    std::optional<VectorX<Scalar>> x_anchor;
};

/// Constraint check for the two scaling lemmas.  The third 6.1 constraint
/// needs p(m-1) > n; the denominator is checked explicitly rather than
/// assumed from the integrability hypothesis.
template <typename Scalar>
void validate_scale_params(const ScaleParams<Scalar>& sp, Scalar p, Scalar m, int n,
                           const ScalingExponents<Scalar>* exps = nullptr) {
    const Scalar a = sp.alpha, b = sp.beta;
    const Scalar slack = Scalar(1) + Scalar(1e-12);
    if (!(a > Scalar(0) && b > Scalar(0)))
        throw HypothesisError("scale: alpha and beta must be positive");
    if (sp.mode == ScaleMode::Lemma61) {
        if (b > std::pow(a, Scalar(-1)) * slack)
            throw HypothesisError("scale 6.1: beta must not exceed 1/alpha");
        if (b > std::pow(a, -(p - Scalar(1)) / (p - Scalar(2))) * slack)
            throw HypothesisError("scale 6.1: beta must not exceed alpha^(-(p-1)/(p-2))");
        const Scalar den = p * (m - Scalar(1)) - Scalar(n);
        if (!(den > Scalar(0)))
            throw HypothesisError("scale 6.1: p(m-1) must exceed n");
        if (b > std::pow(a, -(p * (m - Scalar(1)) + Scalar(1)) / den) * slack)
            throw HypothesisError("scale 6.1: third exponent constraint violated");
    } else {
        if (!exps) throw std::invalid_argument("scale 6.2: exponents required");
        if (!(b > Scalar(0) && b <= Scalar(1) * slack))
            throw HypothesisError("scale 6.2: beta must lie in (0, 1]");
        if (!(a >= Scalar(1) / slack && a <= std::pow(b, exps->e2) * slack))
            throw HypothesisError("scale 6.2: alpha must lie in [1, beta^e2]");
    }
}

template <typename Scalar = double>
struct ScaledProblem {
    GridField<Scalar> v;
    ProblemSpec<Scalar> spec;
};

namespace detail {

/// Index-identity target grid of a space-time rescale: same sample counts,
/// spacing divided by the map factors, anchored so that cell centers map
/// exactly onto cell centers.
template <typename Scalar>
SpaceTimeGrid<Scalar> induced_grid(const SpaceTimeGrid<Scalar>& g, Scalar t_factor, Scalar t_anchor,
                                   Scalar x_factor, const VectorX<Scalar>& x_anchor) {
    VectorX<Scalar> origin = (g.origin - x_anchor) / x_factor;
    return SpaceTimeGrid<Scalar>::make(g.dim, g.cells, g.h / x_factor, g.dt / t_factor,
                                       (g.t_start - t_anchor) / t_factor,
                                       (g.t_end - t_anchor) / t_factor, std::move(origin));
}

template <typename Scalar>
SourceSpec<Scalar> transform_source(const SourceSpec<Scalar>& f, Scalar value_factor,
                                    Scalar t_factor, Scalar t_anchor, Scalar x_factor,
                                    const VectorX<Scalar>& x_anchor,
                                    const SpaceTimeGrid<Scalar>& target) {
    switch (f.kind) {
        case SourceKind::Zero:
            return SourceSpec<Scalar>::zero();
        case SourceKind::Constant:
            return SourceSpec<Scalar>::constant(value_factor * f.value);
        case SourceKind::RadialSingular: {
            // c |x_factor x + x_anchor - x0|^(-a) = c x_factor^(-a) |x - x0'|^(-a)
            const Scalar c2 = value_factor * std::pow(x_factor, -f.exponent) * f.value;
            VectorX<Scalar> c0 = (f.center - x_anchor) / x_factor;
            return SourceSpec<Scalar>::radial_singular(c2, f.exponent, std::move(c0));
        }
        case SourceKind::Sampled: {
            AffineMap<Scalar> map;
            map.t_scale = t_factor;
            map.t_offset = t_anchor;
            map.x_scale = x_factor;
            map.x_offset = x_anchor;
            GridField<Scalar> rf = resample(*f.sampled, target, map);
            rf.values *= value_factor;
            return SourceSpec<Scalar>::from_field(std::move(rf));
        }
    }
    return SourceSpec<Scalar>::zero();
}

template <typename Scalar>
BoundarySpec<Scalar> transform_boundary(const BoundarySpec<Scalar>& bd, Scalar value_factor,
                                        Scalar t_factor, Scalar t_anchor, Scalar x_factor,
                                        const VectorX<Scalar>& x_anchor) {
    if (bd.kind == BoundaryKind::FrozenInitial) return BoundarySpec<Scalar>::frozen_initial();
    VectorX<Scalar> slope = value_factor * x_factor * bd.slope;
    const Scalar tcoef = value_factor * t_factor * bd.tcoef;
    const Scalar offset =
        value_factor * (bd.slope.dot(x_anchor) + bd.tcoef * t_anchor + bd.offset);
    return BoundarySpec<Scalar>::affine(std::move(slope), tcoef, offset);
}

template <typename Scalar>
ScaledProblem<Scalar> apply_scale(const GridField<Scalar>& u, const ProblemSpec<Scalar>& spec,
                                  Scalar alpha, Scalar t_factor, Scalar x_factor,
                                  Scalar coeff_factor, Scalar source_factor, Scalar lambda0_factor,
                                  const ScaleParams<Scalar>& sp,
                                  const std::optional<SpaceTimeGrid<Scalar>>& target_opt) {
    const auto& g = u.grid;
    Scalar t_anchor = sp.t_anchor.value_or(g.t_end);
    VectorX<Scalar> x_anchor;
    if (sp.x_anchor) {
        x_anchor = *sp.x_anchor;
    } else {
        x_anchor.resize(g.dim);
        for (int d = 0; d < g.dim; ++d)
            x_anchor[d] = Scalar(0.5) * (g.domain_low(d) + g.domain_high(d));
    }

    ScaledProblem<Scalar> out;
    if (!target_opt) {
        // index-identity rescale: exact, no interpolation
        out.v.grid = detail::induced_grid(g, t_factor, t_anchor, x_factor, x_anchor);
        out.v.values = alpha * u.values;
    } else {
        AffineMap<Scalar> map;
        map.t_scale = t_factor;
        map.t_offset = t_anchor;
        map.x_scale = x_factor;
        map.x_offset = x_anchor;
        out.v = resample(u, *target_opt, map);
        out.v.values *= alpha;
    }

    out.spec = spec;
    out.spec.grid = out.v.grid;
    out.spec.lambda0 = lambda0_factor * spec.lambda0;
    out.spec.epsilon = coeff_factor * spec.epsilon;
    out.spec.source = detail::transform_source(spec.source, source_factor, t_factor, t_anchor,
                                               x_factor, x_anchor, out.v.grid);
    out.spec.boundary =
        detail::transform_boundary(spec.boundary, alpha, t_factor, t_anchor, x_factor, x_anchor);
    out.spec.initial = out.v.slice(0);
    return out;
}

}  // namespace detail

/// v(t,x) = alpha u(a^(p-1) b^p t, b x) with
///   A' = a^(p-1) b^(p-2) A,  f' = a^p b^p f,  Lambda_0' = a^(p-1) b^(p-2) Lambda_0.
/// Without an explicit target grid the rescale is index-exact.
template <typename Scalar>
ScaledProblem<Scalar> scale_61(const GridField<Scalar>& u, const ProblemSpec<Scalar>& spec,
                               const ScaleParams<Scalar>& sp,
                               std::optional<SpaceTimeGrid<Scalar>> target = {}) {
    validate_scale_params(sp, spec.p, spec.m, spec.grid.dim);
    const Scalar a = sp.alpha, b = sp.beta, p = spec.p;
    const Scalar t_factor = std::pow(a, p - Scalar(1)) * std::pow(b, p);
    const Scalar coeff = std::pow(a, p - Scalar(1)) * std::pow(b, p - Scalar(2));
    const Scalar source = std::pow(a * b, p);
    return detail::apply_scale(u, spec, a, t_factor, b, coeff, source, coeff, sp, target);
}

/// v(t,x) = alpha u(b^e1 t, b x) with A' = b^(e1-2) A, f' = alpha b^e1 f and
/// the same Lambda; valid for 0 < b <= 1 <= alpha <= b^e2.
template <typename Scalar>
ScaledProblem<Scalar> scale_62(const GridField<Scalar>& u, const ProblemSpec<Scalar>& spec,
                               const ScaleParams<Scalar>& sp, const ScalingExponents<Scalar>& exps,
                               std::optional<SpaceTimeGrid<Scalar>> target = {}) {
    validate_scale_params(sp, spec.p, spec.m, spec.grid.dim, &exps);
    const Scalar a = sp.alpha, b = sp.beta;
    const Scalar t_factor = std::pow(b, exps.e1);
    const Scalar coeff = std::pow(b, exps.e1 - Scalar(2));
    const Scalar source = a * std::pow(b, exps.e1);
    return detail::apply_scale(u, spec, a, t_factor, b, coeff, source, Scalar(1), sp, target);
}

/// v_k = 2^k (v - 2) + 2; requires v <= 2 and preserves it.
template <typename Scalar>
GridField<Scalar> dg_level_transform(const GridField<Scalar>& v, int k) {
    const Scalar sup = v.values.maxCoeff();
    if (sup > Scalar(2) + Scalar(1e-12))
        throw HypothesisError("dg_level_transform: field exceeds 2 (sup = " +
                              std::to_string(double(sup)) + ")");
    GridField<Scalar> out = v;
    const Scalar f = std::ldexp(Scalar(1), k);
    out.values = f * (v.values - Scalar(2)) + Scalar(2);
    return out;
}

}  // namespace hjdg
