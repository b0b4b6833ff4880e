#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hjdg/grid.hpp"
#include "hjdg/matrix_ops.hpp"

namespace hjdg {

// ---------------------------------------------------------------------------
// diffusion

enum class DiffusionKind { ScalarConstant, Checkerboard };

/// Unit-scale diffusion pattern.  The effective matrix field of a problem is
/// epsilon * pattern, so the viscosity knob epsilon controls the size of the
/// whole second-order term; flip_sign realizes the "-A" variants.
template <typename Scalar = double>
struct DiffusionSpec {
    DiffusionKind kind = DiffusionKind::ScalarConstant;
    bool flip_sign = false;
    int block_cells = 1;            // checkerboard block edge, in cells
    MatrixX<Scalar> m1, m2;         // the two checkerboard values (symmetric)

    static DiffusionSpec scalar_constant(bool flip = false) {
        DiffusionSpec d;
        d.kind = DiffusionKind::ScalarConstant;
        d.flip_sign = flip;
        return d;
    }

    static DiffusionSpec checkerboard(int block_cells, MatrixX<Scalar> a, MatrixX<Scalar> b,
                                      bool flip = false) {
        if (block_cells < 1) throw std::invalid_argument("diffusion: block size must be >= 1 cell");
        if (!is_symmetric(a) || !is_symmetric(b))
            throw std::invalid_argument("diffusion: checkerboard values must be symmetric");
        if (a.rows() != b.rows())
            throw std::invalid_argument("diffusion: checkerboard values must share a dimension");
        DiffusionSpec d;
        d.kind = DiffusionKind::Checkerboard;
        d.block_cells = block_cells;
        d.m1 = std::move(a);
        d.m2 = std::move(b);
        d.flip_sign = flip;
        return d;
    }

    /// Pattern value at a cell (time-independent; parity of the block index).
    MatrixX<Scalar> pattern_at(const SpaceTimeGrid<Scalar>& g, Index cell) const {
        const Scalar sgn = flip_sign ? Scalar(-1) : Scalar(1);
        if (kind == DiffusionKind::ScalarConstant)
            return sgn * MatrixX<Scalar>::Identity(g.dim, g.dim);
        const Eigen::ArrayXi idx = g.unravel(cell);
        int parity = 0;
        for (int d = 0; d < g.dim; ++d) parity += idx[d] / block_cells;
        return sgn * ((parity % 2 == 0) ? m1 : m2);
    }

    Scalar max_pattern_norm(int dim) const {
        if (kind == DiffusionKind::ScalarConstant) return Scalar(1);
        (void)dim;
        return std::max(spectral_norm_sym(m1), spectral_norm_sym(m2));
    }

    bool diagonal() const {
        if (kind == DiffusionKind::ScalarConstant) return true;
        auto diag_only = [](const MatrixX<Scalar>& M) {
            return (M - MatrixX<Scalar>(M.diagonal().asDiagonal()))
                       .template lpNorm<Eigen::Infinity>() == Scalar(0);
        };
        return diag_only(m1) && diag_only(m2);
    }

    bool nonnegative_diagonal() const {
        if (flip_sign) return false;
        if (kind == DiffusionKind::ScalarConstant) return true;
        return (m1.diagonal().array() >= Scalar(0)).all() &&
               (m2.diagonal().array() >= Scalar(0)).all();
    }
};

// ---------------------------------------------------------------------------
// source

enum class SourceKind { Zero, Constant, RadialSingular, Sampled };

template <typename Scalar = double>
struct SourceSpec {
    SourceKind kind = SourceKind::Zero;
    Scalar value = Scalar(0);       // constant value, or radial strength
    Scalar exponent = Scalar(0);    // radial: value * |x - center|^(-exponent)
    VectorX<Scalar> center;
    std::shared_ptr<const GridField<Scalar>> sampled;  // Sampled kind only

    static SourceSpec zero() { return SourceSpec{}; }

    static SourceSpec constant(Scalar c) {
        SourceSpec s;
        s.kind = SourceKind::Constant;
        s.value = c;
        return s;
    }

    static SourceSpec radial_singular(Scalar strength, Scalar exponent, VectorX<Scalar> center) {
        if (!(exponent > Scalar(0)))
            throw std::invalid_argument("source: radial exponent must be positive");
        SourceSpec s;
        s.kind = SourceKind::RadialSingular;
        s.value = strength;
        s.exponent = exponent;
        s.center = std::move(center);
        return s;
    }

    static SourceSpec from_field(GridField<Scalar> f) {
        SourceSpec s;
        s.kind = SourceKind::Sampled;
        s.sampled = std::make_shared<const GridField<Scalar>>(std::move(f));
        return s;
    }

    bool time_independent() const { return kind != SourceKind::Sampled; }

    Scalar value_at(const SpaceTimeGrid<Scalar>& g, int t_index, Index cell) const {
        switch (kind) {
            case SourceKind::Zero: return Scalar(0);
            case SourceKind::Constant: return value;
            case SourceKind::RadialSingular: {
                const Scalar d = (g.point(cell) - center).norm();
                return value * std::pow(d, -exponent);
            }
            case SourceKind::Sampled: return sampled->at(t_index, cell);
        }
        return Scalar(0);
    }

    /// One spatial slice of f; for the time-independent kinds the result is
    /// valid for every t_index.
    ArrayX<Scalar> sample_slice(const SpaceTimeGrid<Scalar>& g, int t_index) const {
        const Index nc = g.cells_total();
        ArrayX<Scalar> out(nc);
        for (Index c = 0; c < nc; ++c) out[c] = value_at(g, t_index, c);
        return out;
    }
};

// ---------------------------------------------------------------------------
// boundary data

enum class BoundaryKind { Affine, FrozenInitial };

/// Dirichlet data on the boundary ring of cell centers.
/// Affine: slope.x + tcoef*t + offset.  FrozenInitial: the initial sample.
template <typename Scalar = double>
struct BoundarySpec {
    BoundaryKind kind = BoundaryKind::FrozenInitial;
    VectorX<Scalar> slope;
    Scalar tcoef = Scalar(0);
    Scalar offset = Scalar(0);

    static BoundarySpec frozen_initial() { return BoundarySpec{}; }

    static BoundarySpec affine(VectorX<Scalar> slope, Scalar tcoef, Scalar offset) {
        BoundarySpec b;
        b.kind = BoundaryKind::Affine;
        b.slope = std::move(slope);
        b.tcoef = tcoef;
        b.offset = offset;
        return b;
    }
};

// ---------------------------------------------------------------------------
// Hamiltonian envelope

/// The solver kernel is fixed to the model form H(v) = |v|^p / Lambda; this
/// type carries the growth envelope used to vet alternative Hamiltonians.
template <typename Scalar = double>
struct HamiltonianSpec {
    Scalar lambda = Scalar(1);
    Scalar p = Scalar(3);
    std::function<Scalar(const VectorX<Scalar>&)> callback;  // optional

    Scalar model(const VectorX<Scalar>& v) const {
        return std::pow(v.norm(), p) / lambda;
    }
};

/// Check the growth envelope
///   |v|^p/Lambda - f_min <= H(v) <= Lambda |v|^p + Lambda
/// on an axis-aligned lattice of gradient samples; violations are data.
template <typename Scalar>
std::vector<std::string> validate_hamiltonian(const HamiltonianSpec<Scalar>& spec, int dim,
                                              Scalar f_min, Scalar v_max, int samples) {
    std::vector<std::string> out;
    if (!spec.callback) return out;
    for (int d = 0; d < dim; ++d) {
        for (int s = -samples; s <= samples; ++s) {
            VectorX<Scalar> v = VectorX<Scalar>::Zero(dim);
            v[d] = v_max * Scalar(s) / Scalar(samples);
            const Scalar H = spec.callback(v);
            const Scalar mag = std::pow(v.norm(), spec.p);
            const Scalar lo = mag / spec.lambda - f_min;
            const Scalar hi = spec.lambda * mag + spec.lambda;
            if (H < lo - Scalar(1e-12) || H > hi + Scalar(1e-12)) {
                out.push_back("hamiltonian outside growth envelope at |v|=" +
                              std::to_string(double(v.norm())));
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// the PDE instance

template <typename Scalar = double>
struct ProblemSpec {
    Scalar p = Scalar(3);
    Scalar lambda = Scalar(1);    // Lambda
    Scalar lambda0 = Scalar(0);   // Lambda_0
    Scalar m = Scalar(2);
    Scalar epsilon = Scalar(0);   // in [0, Lambda]
    DiffusionSpec<Scalar> diffusion;
    SourceSpec<Scalar> source;
    BoundarySpec<Scalar> boundary;
    SpaceTimeGrid<Scalar> grid;
    ArrayX<Scalar> initial;       // sampled on the grid cells

    /// Effective diffusion matrix A(x) = epsilon * pattern(x).
    MatrixX<Scalar> diffusion_at(Index cell) const {
        return epsilon * diffusion.pattern_at(grid, cell);
    }

    Scalar boundary_value(Scalar t, Index cell) const {
        if (boundary.kind == BoundaryKind::FrozenInitial) return initial[cell];
        return boundary.slope.dot(grid.point(cell)) + boundary.tcoef * t + boundary.offset;
    }
};

// ---------------------------------------------------------------------------
// operations

/// Hoelder conjugate m* = m/(m-1).
template <typename Scalar>
Scalar m_conjugate(Scalar m) {
    if (!(m > Scalar(1))) throw std::invalid_argument("m_conjugate: requires m > 1");
    return m / (m - Scalar(1));
}

namespace detail {

/// Analytic integral of |x - x0|^(-a*m) over the cell containing x0.
/// In 1D the interval integral is exact; in higher dimensions the cell is
/// replaced by the equal-volume ball centered at the singularity, which is
/// O(h)-consistent and refines away.
template <typename Scalar>
Scalar singular_cell_integral(const SpaceTimeGrid<Scalar>& g, const VectorX<Scalar>& x0,
                              Index cell, Scalar am) {
    const int n = g.dim;
    if (am >= Scalar(n)) return std::numeric_limits<Scalar>::infinity();
    if (n == 1) {
        const Eigen::ArrayXi idx = g.unravel(cell);
        const Scalar lo = g.origin[0] + Scalar(idx[0]) * g.h;
        const Scalar hi = lo + g.h;
        const Scalar dl = x0[0] - lo, dr = hi - x0[0];
        const Scalar e = Scalar(1) - am;
        return (std::pow(dl, e) + std::pow(dr, e)) / e;
    }
    const Scalar vol = std::pow(g.h, Scalar(n));
    const Scalar unit = ParabolicCylinder<Scalar>::unit_ball_volume(n);
    const Scalar r_eq = std::pow(vol / unit, Scalar(1) / Scalar(n));
    // int_{|y|<r} |y|^(-am) dy = n*unit/(n-am) * r^(n-am)
    return Scalar(n) * unit / (Scalar(n) - am) * std::pow(r_eq, Scalar(n) - am);
}

}  // namespace detail

/// L^m norm of the source over a cylinder by midpoint quadrature; the cell
/// containing a radial singularity contributes its analytic integral.  For
/// the analytic (time-independent) kinds the time factor is exact.  A
/// non-integrable radial choice (a*m >= n) comes back as +infinity.
template <typename Scalar>
Scalar lm_norm(const SourceSpec<Scalar>& f, Scalar m, const ParabolicCylinder<Scalar>& region,
               const SpaceTimeGrid<Scalar>& g) {
    if (!(m >= Scalar(1))) throw std::invalid_argument("lm_norm: requires m >= 1");
    if (f.kind == SourceKind::Zero) return Scalar(0);

    const Scalar hn = std::pow(g.h, Scalar(g.dim));
    const auto cells = cells_in_ball(g, region.ball());

    if (f.time_independent()) {
        const Scalar t_lo = std::max(region.t_lo, g.t_start);
        const Scalar t_hi = std::min(region.t_hi, g.t_end);
        const Scalar t_len = std::max(t_hi - t_lo, Scalar(0));
        if (t_len == Scalar(0)) return Scalar(0);

        if (f.kind == SourceKind::Constant)
            return std::pow(t_len * hn * Scalar(cells.size()), Scalar(1) / m) * std::abs(f.value);

        // radial-singular
        const Scalar am = f.exponent * m;
        if (am >= Scalar(g.dim)) return std::numeric_limits<Scalar>::infinity();
        // locate the cell containing the singularity, if it is on the grid
        std::optional<Index> sing_cell;
        {
            bool inside = true;
            Eigen::ArrayXi idx(g.dim);
            for (int d = 0; d < g.dim; ++d) {
                const Scalar fd = (f.center[d] - g.origin[d]) / g.h;
                if (fd < Scalar(0) || fd >= Scalar(g.cells[d])) { inside = false; break; }
                idx[d] = std::min(int(fd), g.cells[d] - 1);
            }
            if (inside) sing_cell = g.ravel(idx);
        }
        Scalar space = 0;
        for (Index c : cells) {
            if (sing_cell && c == *sing_cell) {
                space += detail::singular_cell_integral(g, f.center, c, am);
            } else {
                const Scalar d = (g.point(c) - f.center).norm();
                space += std::pow(d, -am) * hn;
            }
        }
        return std::abs(f.value) * std::pow(t_len * space, Scalar(1) / m);
    }

    // sampled field: rectangle rule over the slices in the window
    Scalar acc = 0;
    for (int j : slices_in_interval(g, region.t_lo, region.t_hi)) {
        Scalar sl = 0;
        for (Index c : cells) sl += std::pow(std::abs(f.sampled->at(j, c)), m);
        acc += sl;
    }
    return std::pow(acc * g.dt * hn, Scalar(1) / m);
}

/// Hypothesis checklist of the problem class; violations are returned as
/// data, never thrown.
template <typename Scalar>
std::vector<std::string> validate_problem(const ProblemSpec<Scalar>& spec) {
    std::vector<std::string> v;
    const int n = spec.grid.dim;
    if (!(spec.p > Scalar(2))) v.push_back("p must exceed 2");
    if (!(spec.lambda > Scalar(0))) v.push_back("lambda must be positive");
    if (spec.lambda0 < Scalar(0)) v.push_back("lambda0 must be nonnegative");
    const Scalar m_floor = Scalar(1) + Scalar(std::max(n, 2)) / spec.p;
    if (!(spec.m > m_floor))
        v.push_back("m must exceed 1 + max(n,2)/p = " + std::to_string(double(m_floor)));
    if (spec.epsilon < Scalar(0) || spec.epsilon > spec.lambda)
        v.push_back("epsilon must lie in [0, lambda]");

    const Scalar a_norm = std::abs(spec.epsilon) * spec.diffusion.max_pattern_norm(n);
    if (a_norm > spec.lambda * (Scalar(1) + Scalar(1e-12)))
        v.push_back("diffusion norm exceeds lambda");

    // full-domain source norm
    VectorX<Scalar> c(n);
    Scalar r2 = 0;
    for (int d = 0; d < n; ++d) {
        c[d] = Scalar(0.5) * (spec.grid.domain_low(d) + spec.grid.domain_high(d));
        const Scalar half = Scalar(0.5) * (spec.grid.domain_high(d) - spec.grid.domain_low(d));
        r2 += half * half;
    }
    const auto whole = ParabolicCylinder<Scalar>::make(
        spec.grid.t_start, spec.grid.t_end, std::sqrt(r2) * Scalar(1.0000001), c);
    const Scalar fn = lm_norm(spec.source, spec.m, whole, spec.grid);
    if (!(fn <= spec.lambda * (Scalar(1) + Scalar(1e-9)))) {
        if (std::isinf(fn))
            v.push_back("source is not locally L^m (divergent norm)");
        else
            v.push_back("source L^m norm " + std::to_string(double(fn)) + " exceeds lambda");
    }
    if (Index(spec.initial.size()) != spec.grid.cells_total())
        v.push_back("initial data size does not match the grid");
    return v;
}

}  // namespace hjdg
