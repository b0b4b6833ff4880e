#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hjdg/errors.hpp"

namespace hjdg {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using ArrayXX = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

/// Uniform space-time grid.  Spatial samples live at cell centers
/// origin[d] + (i_d + 1/2) h, time samples at the nodes t_start + j dt.
template <typename Scalar = double>
struct SpaceTimeGrid {
    int dim = 1;
    Eigen::ArrayXi cells;     // cells per axis, each >= 4
    Scalar h = Scalar(1);     // uniform spacing, all axes
    Scalar dt = Scalar(1);
    Scalar t_start = Scalar(0);
    Scalar t_end = Scalar(1);
    VectorX<Scalar> origin;   // coordinate of the low corner

    static SpaceTimeGrid make(int dim, Eigen::ArrayXi cells, Scalar h, Scalar dt,
                              Scalar t_start, Scalar t_end, VectorX<Scalar> origin) {
        if (dim < 1) throw std::invalid_argument("grid: dim must be >= 1");
        if (cells.size() != dim || origin.size() != dim)
            throw std::invalid_argument("grid: cells/origin length must equal dim");
        if ((cells < 4).any())
            throw std::invalid_argument("grid: every axis needs at least 4 cells");
        if (!(h > Scalar(0)) || !(dt > Scalar(0)))
            throw std::invalid_argument("grid: h and dt must be positive");
        if (!(t_start < t_end))
            throw std::invalid_argument("grid: t_start must precede t_end");
        const Scalar q = (t_end - t_start) / dt;
        if (std::abs(q - std::round(q)) > Scalar(1e-9))
            throw std::invalid_argument("grid: (t_end - t_start)/dt must be an integer");
        SpaceTimeGrid g;
        g.dim = dim;
        g.cells = std::move(cells);
        g.h = h;
        g.dt = dt;
        g.t_start = t_start;
        g.t_end = t_end;
        g.origin = std::move(origin);
        return g;
    }

    /// Grid whose spatial domain is the box of side cells*h centered at 0.
    static SpaceTimeGrid centered(int dim, Eigen::ArrayXi cells, Scalar h, Scalar dt,
                                  Scalar t_start, Scalar t_end) {
        VectorX<Scalar> origin(dim);
        for (int d = 0; d < dim; ++d) origin[d] = -Scalar(0.5) * h * Scalar(cells[d]);
        return make(dim, std::move(cells), h, dt, t_start, t_end, std::move(origin));
    }

    static SpaceTimeGrid centered_cube(int dim, int cells_per_axis, Scalar h, Scalar dt,
                                       Scalar t_start, Scalar t_end) {
        return centered(dim, Eigen::ArrayXi::Constant(dim, cells_per_axis), h, dt, t_start, t_end);
    }

    int time_steps() const { return int(std::llround(double((t_end - t_start) / dt))); }
    int num_slices() const { return time_steps() + 1; }
    Scalar time_at(int j) const { return t_start + Scalar(j) * dt; }

    Index cells_total() const {
        Index n = 1;
        for (int d = 0; d < dim; ++d) n *= cells[d];
        return n;
    }

    /// Row-major spatial order: the last axis varies fastest.
    Index stride(int axis) const {
        Index s = 1;
        for (int d = axis + 1; d < dim; ++d) s *= cells[d];
        return s;
    }

    Eigen::ArrayXi unravel(Index linear) const {
        Eigen::ArrayXi idx(dim);
        for (int d = dim - 1; d >= 0; --d) {
            idx[d] = int(linear % cells[d]);
            linear /= cells[d];
        }
        return idx;
    }

    Index ravel(const Eigen::ArrayXi& idx) const {
        Index linear = 0;
        for (int d = 0; d < dim; ++d) linear = linear * cells[d] + idx[d];
        return linear;
    }

    Scalar coord(int axis, int cell_idx) const {
        return origin[axis] + (Scalar(cell_idx) + Scalar(0.5)) * h;
    }

    VectorX<Scalar> point(Index linear) const {
        const Eigen::ArrayXi idx = unravel(linear);
        VectorX<Scalar> x(dim);
        for (int d = 0; d < dim; ++d) x[d] = coord(d, idx[d]);
        return x;
    }

    bool on_boundary_ring(const Eigen::ArrayXi& idx) const {
        for (int d = 0; d < dim; ++d)
            if (idx[d] == 0 || idx[d] == cells[d] - 1) return true;
        return false;
    }

    Scalar domain_low(int axis) const { return origin[axis]; }
    Scalar domain_high(int axis) const { return origin[axis] + Scalar(cells[axis]) * h; }

    bool same_layout(const SpaceTimeGrid& o) const {
        return dim == o.dim && (cells == o.cells).all() && h == o.h && dt == o.dt &&
               t_start == o.t_start && t_end == o.t_end;
    }
};

template <typename Scalar = double>
struct Ball {
    Scalar radius = Scalar(1);
    VectorX<Scalar> center;

    static Ball origin(int dim, Scalar radius) {
        Ball b;
        b.radius = radius;
        b.center = VectorX<Scalar>::Zero(dim);
        return b;
    }

    // strict membership; deterministic tie-breaking on the sphere itself
    bool contains(const VectorX<Scalar>& x) const {
        return (x - center).squaredNorm() < radius * radius;
    }
};

/// A time interval [t_lo, t_hi] paired with a spatial ball.  The reference
/// cylinders of the diagnostics are all centered at x = 0 with t_hi = 0.
template <typename Scalar = double>
struct ParabolicCylinder {
    Scalar t_lo = Scalar(-1);
    Scalar t_hi = Scalar(0);
    Scalar radius = Scalar(1);
    VectorX<Scalar> center;

    static ParabolicCylinder make(Scalar t_lo, Scalar t_hi, Scalar radius, VectorX<Scalar> center) {
        if (!(t_lo < t_hi)) throw std::invalid_argument("cylinder: t_lo must precede t_hi");
        if (!(radius > Scalar(0))) throw std::invalid_argument("cylinder: radius must be positive");
        ParabolicCylinder c;
        c.t_lo = t_lo;
        c.t_hi = t_hi;
        c.radius = radius;
        c.center = std::move(center);
        return c;
    }

    static ParabolicCylinder make_origin(int dim, Scalar t_lo, Scalar t_hi, Scalar radius) {
        return make(t_lo, t_hi, radius, VectorX<Scalar>::Zero(dim));
    }

    // Q1 = [-1,0] x B1
    static ParabolicCylinder q1(int dim) { return make_origin(dim, Scalar(-1), Scalar(0), Scalar(1)); }
    // Q2_bar = [-2,0] x B2
    static ParabolicCylinder q2_bar(int dim) { return make_origin(dim, Scalar(-2), Scalar(0), Scalar(2)); }
    // Q2 = [-4,0] x B2
    static ParabolicCylinder q2(int dim) { return make_origin(dim, Scalar(-4), Scalar(0), Scalar(2)); }
    // Q3 = [-4,0] x B3
    static ParabolicCylinder q3(int dim) { return make_origin(dim, Scalar(-4), Scalar(0), Scalar(3)); }

    Ball<Scalar> ball() const { return Ball<Scalar>{radius, center}; }

    bool contains_time(Scalar t) const {
        const Scalar slack = Scalar(1e-9) * (std::abs(t_lo) + std::abs(t_hi) + Scalar(1));
        return t >= t_lo - slack && t <= t_hi + slack;
    }

    /// Analytic measure |[t_lo,t_hi] x B_r| in dimension dim.
    Scalar measure(int dim) const {
        return (t_hi - t_lo) * unit_ball_volume(dim) * std::pow(radius, Scalar(dim));
    }

    static Scalar unit_ball_volume(int dim) {
        return Scalar(std::pow(std::numbers::pi_v<double>, 0.5 * dim) /
                      std::tgamma(0.5 * dim + 1.0));
    }
};

/// Values of a scalar function sampled on a space-time grid, stored
/// time-major with row-major spatial order inside each slice.
template <typename Scalar = double>
struct GridField {
    SpaceTimeGrid<Scalar> grid;
    ArrayX<Scalar> values;  // num_slices * cells_total entries

    static GridField zero(SpaceTimeGrid<Scalar> g) {
        GridField f;
        const Index n = Index(g.num_slices()) * g.cells_total();
        f.grid = std::move(g);
        f.values = ArrayX<Scalar>::Zero(n);
        return f;
    }

    template <typename Fn>  // fn(t, x) -> Scalar
    static GridField from_function(SpaceTimeGrid<Scalar> g, Fn&& fn) {
        GridField f = zero(std::move(g));
        const Index nc = f.grid.cells_total();
        for (int j = 0; j < f.grid.num_slices(); ++j) {
            const Scalar t = f.grid.time_at(j);
            for (Index c = 0; c < nc; ++c)
                f.values[Index(j) * nc + c] = fn(t, f.grid.point(c));
        }
        return f;
    }

    Index slice_size() const { return grid.cells_total(); }

    Eigen::Map<ArrayX<Scalar>> slice(int j) {
        return {values.data() + Index(j) * slice_size(), slice_size()};
    }
    Eigen::Map<const ArrayX<Scalar>> slice(int j) const {
        return {values.data() + Index(j) * slice_size(), slice_size()};
    }

    Scalar& at(int j, Index cell) { return values[Index(j) * slice_size() + cell]; }
    Scalar at(int j, Index cell) const { return values[Index(j) * slice_size() + cell]; }

    bool all_finite() const { return values.isFinite().all(); }

    void require_finite(const char* what = "field") const {
        if (!all_finite()) throw SolverError(std::string(what) + ": non-finite value present");
    }
};

// ---------------------------------------------------------------------------
// membership helpers

/// Linear indices of the cells whose centers lie strictly inside the ball.
template <typename Scalar>
std::vector<Index> cells_in_ball(const SpaceTimeGrid<Scalar>& g, const Ball<Scalar>& ball) {
    std::vector<Index> out;
    const Index nc = g.cells_total();
    const Scalar r2 = ball.radius * ball.radius;
    for (Index c = 0; c < nc; ++c) {
        const Eigen::ArrayXi idx = g.unravel(c);
        Scalar d2 = 0;
        for (int d = 0; d < g.dim; ++d) {
            const Scalar dx = g.coord(d, idx[d]) - ball.center[d];
            d2 += dx * dx;
        }
        if (d2 < r2) out.push_back(c);
    }
    return out;
}

/// Time-slice indices j with t_j in [t_lo, t_hi] (inclusive, small slack).
template <typename Scalar>
std::vector<int> slices_in_interval(const SpaceTimeGrid<Scalar>& g, Scalar t_lo, Scalar t_hi) {
    std::vector<int> out;
    for (int j = 0; j < g.num_slices(); ++j) {
        const Scalar t = g.time_at(j);
        const Scalar slack = Scalar(1e-9) * (std::abs(t_lo) + std::abs(t_hi) + Scalar(1));
        if (t >= t_lo - slack && t <= t_hi + slack) out.push_back(j);
    }
    return out;
}

// ---------------------------------------------------------------------------
// discrete differential operators

/// Centered second-order differences in the interior, one-sided first-order
/// on the boundary ring.  Returns a (cells x dim) array.
template <typename Scalar>
ArrayXX<Scalar> gradient_centered(const GridField<Scalar>& u, int t_index) {
    const auto& g = u.grid;
    if (t_index < 0 || t_index >= g.num_slices())
        throw std::out_of_range("gradient_centered: time index out of range");
    const auto s = u.slice(t_index);
    const Index nc = g.cells_total();
    ArrayXX<Scalar> grad(nc, g.dim);
    const Scalar inv_h = Scalar(1) / g.h;
    const Scalar inv_2h = Scalar(0.5) * inv_h;
    for (Index c = 0; c < nc; ++c) {
        const Eigen::ArrayXi idx = g.unravel(c);
        for (int d = 0; d < g.dim; ++d) {
            const Index st = g.stride(d);
            if (idx[d] == 0)
                grad(c, d) = (s[c + st] - s[c]) * inv_h;
            else if (idx[d] == g.cells[d] - 1)
                grad(c, d) = (s[c] - s[c - st]) * inv_h;
            else
                grad(c, d) = (s[c + st] - s[c - st]) * inv_2h;
        }
    }
    return grad;
}

/// Squared Godunov gradient magnitude per cell:
///   sum_d max(D^-_d, 0)^2 + min(D^+_d, 0)^2
/// with one-sided differences treated as absent (0) at the grid edge.
template <typename Scalar, typename Derived>
ArrayX<Scalar> upwind_gradient_sq(const SpaceTimeGrid<Scalar>& g,
                                  const Eigen::ArrayBase<Derived>& s) {
    const Index nc = g.cells_total();
    ArrayX<Scalar> out(nc);
    const Scalar inv_h = Scalar(1) / g.h;
    for (Index c = 0; c < nc; ++c) {
        const Eigen::ArrayXi idx = g.unravel(c);
        Scalar acc = 0;
        for (int d = 0; d < g.dim; ++d) {
            const Index st = g.stride(d);
            if (idx[d] > 0) {
                const Scalar bwd = (s[c] - s[c - st]) * inv_h;
                if (bwd > Scalar(0)) acc += bwd * bwd;
            }
            if (idx[d] < g.cells[d] - 1) {
                const Scalar fwd = (s[c + st] - s[c]) * inv_h;
                if (fwd < Scalar(0)) acc += fwd * fwd;
            }
        }
        out[c] = acc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// quadrature

/// Midpoint rule: h^n times the sum over cell centers strictly inside the
/// ball.  Cells outside the grid contribute nothing.
template <typename Scalar, typename Derived>
Scalar integrate_space(const SpaceTimeGrid<Scalar>& g, const Eigen::ArrayBase<Derived>& values,
                       const Ball<Scalar>& ball) {
    Scalar acc = 0;
    for (Index c : cells_in_ball(g, ball)) acc += values[c];
    return acc * std::pow(g.h, Scalar(g.dim));
}

template <typename Scalar>
Scalar integrate_spacetime(const GridField<Scalar>& u, const ParabolicCylinder<Scalar>& cyl) {
    const auto cells = cells_in_ball(u.grid, cyl.ball());
    const auto slices = slices_in_interval(u.grid, cyl.t_lo, cyl.t_hi);
    Scalar acc = 0;
    for (int j : slices) {
        const auto s = u.slice(j);
        Scalar sl = 0;
        for (Index c : cells) sl += s[c];
        acc += sl;
    }
    return acc * u.grid.dt * std::pow(u.grid.h, Scalar(u.grid.dim));
}

/// Exact max and min of the sampled values inside the cylinder.
template <typename Scalar>
std::pair<Scalar, Scalar> sup_inf_on(const GridField<Scalar>& u,
                                     const ParabolicCylinder<Scalar>& cyl) {
    const auto cells = cells_in_ball(u.grid, cyl.ball());
    const auto slices = slices_in_interval(u.grid, cyl.t_lo, cyl.t_hi);
    if (cells.empty() || slices.empty())
        throw std::invalid_argument("sup_inf_on: cylinder contains no grid samples");
    Scalar hi = -std::numeric_limits<Scalar>::infinity();
    Scalar lo = std::numeric_limits<Scalar>::infinity();
    for (int j : slices) {
        const auto s = u.slice(j);
        for (Index c : cells) {
            hi = std::max(hi, s[c]);
            lo = std::min(lo, s[c]);
        }
    }
    return {hi, lo};
}

/// Number of space-time samples inside the cylinder.
template <typename Scalar>
Index samples_in(const SpaceTimeGrid<Scalar>& g, const ParabolicCylinder<Scalar>& cyl) {
    return Index(cells_in_ball(g, cyl.ball()).size()) *
           Index(slices_in_interval(g, cyl.t_lo, cyl.t_hi).size());
}

// ---------------------------------------------------------------------------
// interpolation / resampling

/// Multilinear interpolation in space-time.  Throws when the query point
/// leaves the convex hull of the samples (tiny edge slack for rounding).
template <typename Scalar>
Scalar interpolate(const GridField<Scalar>& u, Scalar t, const VectorX<Scalar>& x) {
    const auto& g = u.grid;
    const Scalar slack = Scalar(1e-9);

    Scalar ft = (t - g.t_start) / g.dt;
    if (ft < -slack || ft > Scalar(g.time_steps()) + slack)
        throw std::invalid_argument("interpolate: time outside the sampled range");
    ft = std::clamp(ft, Scalar(0), Scalar(g.time_steps()));
    int j0 = std::min(int(ft), g.time_steps() - 1);
    if (g.time_steps() == 0) j0 = 0;
    const Scalar wt = std::clamp(ft - Scalar(j0), Scalar(0), Scalar(1));

    Eigen::ArrayXi i0(g.dim);
    VectorX<Scalar> wx(g.dim);
    for (int d = 0; d < g.dim; ++d) {
        Scalar fd = (x[d] - g.origin[d]) / g.h - Scalar(0.5);
        const Scalar top = Scalar(g.cells[d] - 1);
        if (fd < -slack || fd > top + slack)
            throw std::invalid_argument("interpolate: point outside the sampled hull");
        fd = std::clamp(fd, Scalar(0), top);
        i0[d] = std::min(int(fd), g.cells[d] - 2);
        wx[d] = std::clamp(fd - Scalar(i0[d]), Scalar(0), Scalar(1));
    }

    const Index nc = g.cells_total();
    Scalar acc = 0;
    const int corners = 1 << g.dim;
    for (int tc = 0; tc < 2; ++tc) {
        const Scalar tw = tc ? wt : Scalar(1) - wt;
        if (tw == Scalar(0)) continue;
        const Index base = Index(j0 + tc) * nc;
        for (int mask = 0; mask < corners; ++mask) {
            Scalar w = tw;
            Index c = 0;
            for (int d = 0; d < g.dim; ++d) {
                const int bit = (mask >> d) & 1;
                w *= bit ? wx[d] : Scalar(1) - wx[d];
                c = c * g.cells[d] + (i0[d] + bit);
            }
            if (w != Scalar(0)) acc += w * u.values[base + c];
        }
    }
    return acc;
}

/// Affine sampling map (t, x) -> (t_scale*t + t_offset, x_scale*x + x_offset)
/// used by the scaling transforms and the normalization step.
template <typename Scalar = double>
struct AffineMap {
    Scalar t_scale = Scalar(1);
    Scalar t_offset = Scalar(0);
    Scalar x_scale = Scalar(1);
    VectorX<Scalar> x_offset;

    static AffineMap identity(int dim) {
        AffineMap m;
        m.x_offset = VectorX<Scalar>::Zero(dim);
        return m;
    }
};

/// Resample u under the map: result(t, x) = u(map(t, x)) on target.
template <typename Scalar>
GridField<Scalar> resample(const GridField<Scalar>& u, const SpaceTimeGrid<Scalar>& target,
                           const AffineMap<Scalar>& map) {
    GridField<Scalar> out = GridField<Scalar>::zero(target);
    const Index nc = target.cells_total();
    std::vector<VectorX<Scalar>> pts(static_cast<size_t>(nc));
    for (Index c = 0; c < nc; ++c) {
        pts[size_t(c)] = map.x_scale * target.point(c) + map.x_offset;
    }
    for (int j = 0; j < target.num_slices(); ++j) {
        const Scalar s = map.t_scale * target.time_at(j) + map.t_offset;
        for (Index c = 0; c < nc; ++c) out.at(j, c) = interpolate(u, s, pts[size_t(c)]);
    }
    return out;
}

}  // namespace hjdg
