#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hjdg/errors.hpp"
#include "hjdg/grid.hpp"
#include "hjdg/matrix_ops.hpp"
#include "hjdg/problem.hpp"
#include "hjdg/smoothstep.hpp"

namespace hjdg {

template <typename Scalar = double>
struct SchemeConfig {
    Scalar cfl_safety = Scalar(0.4);
    std::optional<Scalar> max_grad_clip;  // reporting threshold, never enforced
    // When false, solve() marches at the grid dt verbatim and a CFL violation
    // is an error; when true it subdivides each output interval as needed.
    bool allow_substeps = true;
};

/// |s|^p from the squared magnitude, with fast paths for the common p.
template <typename Scalar>
inline Scalar pow_from_sq(Scalar s_sq, Scalar p) {
    if (s_sq <= Scalar(0)) return Scalar(0);
    if (p == Scalar(3)) return s_sq * std::sqrt(s_sq);
    if (p == Scalar(4)) return s_sq * s_sq;
    if (p == Scalar(2)) return s_sq;
    return std::pow(s_sq, Scalar(0.5) * p);
}

/// Godunov numerical Hamiltonian for H(v) = |v|^p / lambda:
///   (sum_d max(D^-_d,0)^2 + min(D^+_d,0)^2)^(p/2) / lambda.
template <typename Scalar>
Scalar hamiltonian_flux(const VectorX<Scalar>& forward_diffs,
                        const VectorX<Scalar>& backward_diffs, Scalar p, Scalar lambda) {
    Scalar s = 0;
    for (Index d = 0; d < forward_diffs.size(); ++d) {
        const Scalar b = std::max(backward_diffs[d], Scalar(0));
        const Scalar f = std::min(forward_diffs[d], Scalar(0));
        s += b * b + f * f;
    }
    return pow_from_sq(s, p) / lambda;
}

struct RunMetadata {
    double max_gradient = 0;        // max Godunov |grad u| seen during the run
    double dt_min = 0;              // smallest substep actually taken
    long long total_substeps = 0;
    double cfl_margin_min = 0;      // min over substeps of (limit / dt used)
    double wall_seconds = 0;
    bool non_monotone = false;      // diffusion outside the monotone regime
    long long grad_clip_exceeded = 0;
    double sup_abs = 0;             // sup |u| over the run
    double grad_lp_final = 0;       // ||grad u(t_end)||_p by centered differences

    std::string to_kv() const {
        std::ostringstream os;
        os << "max_gradient=" << max_gradient << '\n'
           << "dt_min=" << dt_min << '\n'
           << "total_substeps=" << total_substeps << '\n'
           << "cfl_margin_min=" << cfl_margin_min << '\n'
           << "wall_seconds=" << wall_seconds << '\n'
           << "non_monotone=" << (non_monotone ? 1 : 0) << '\n'
           << "grad_clip_exceeded=" << grad_clip_exceeded << '\n'
           << "sup_abs=" << sup_abs << '\n'
           << "grad_lp_final=" << grad_lp_final << '\n';
        return os.str();
    }
};

/// Explicit monotone stepper with the coefficient fields precomputed.
/// Holds references: the spec must outlive the stepper.
template <typename Scalar = double>
class Stepper {
  public:
    Stepper(const ProblemSpec<Scalar>& spec, const SchemeConfig<Scalar>& cfg)
        : spec_(spec), cfg_(cfg), grid_(spec.grid) {
        const Index nc = grid_.cells_total();
        const int n = grid_.dim;
        inv_h_ = Scalar(1) / grid_.h;

        strides_.resize(n);
        for (int d = 0; d < n; ++d) strides_[d] = grid_.stride(d);

        interior_.reserve(size_t(nc));
        for (Index c = 0; c < nc; ++c) {
            if (grid_.on_boundary_ring(grid_.unravel(c)))
                boundary_.push_back(c);
            else
                interior_.push_back(c);
        }

        if (spec_.source.time_independent()) f_cache_ = spec_.source.sample_slice(grid_, 0);

        // effective diffusion A = epsilon * pattern
        const bool iso = spec_.diffusion.kind == DiffusionKind::ScalarConstant;
        const bool zero_a = spec_.epsilon == Scalar(0);
        monotone_ = zero_a || (spec_.diffusion.diagonal() && spec_.diffusion.nonnegative_diagonal());
        if (zero_a) {
            diff_mode_ = DiffMode::None;
            a_max_ = 0;
        } else if (iso) {
            diff_mode_ = DiffMode::IsoConst;
            a_iso_ = spec_.epsilon * (spec_.diffusion.flip_sign ? Scalar(-1) : Scalar(1));
            a_max_ = std::abs(a_iso_);
        } else {
            const bool diag = spec_.diffusion.diagonal();
            diff_mode_ = diag ? DiffMode::DiagField : DiffMode::FullField;
            faces_.assign(size_t(n), ArrayX<Scalar>::Zero(nc));
            if (!diag) amat_.resize(size_t(nc));
            a_max_ = 0;
            std::vector<MatrixX<Scalar>> cache(static_cast<size_t>(nc));
            for (Index c = 0; c < nc; ++c) {
                cache[size_t(c)] = spec_.diffusion_at(c);
                a_max_ = std::max(a_max_, cache[size_t(c)].cwiseAbs().maxCoeff());
                if (!diag) amat_[size_t(c)] = cache[size_t(c)];
            }
            for (int d = 0; d < n; ++d) {
                for (Index c = 0; c < nc; ++c) {
                    const Eigen::ArrayXi idx = grid_.unravel(c);
                    if (idx[d] + 1 < grid_.cells[d])
                        faces_[size_t(d)][c] = Scalar(0.5) * (cache[size_t(c)](d, d) +
                                                              cache[size_t(c + strides_[d])](d, d));
                }
            }
        }
    }

    bool monotone_regime() const { return monotone_; }
    Scalar a_max() const { return a_max_; }

    /// Max squared Godunov gradient of a slice (one full pass).
    Scalar max_grad_sq(const ArrayX<Scalar>& u) const {
        Scalar g = 0;
        for (Index c : interior_) g = std::max(g, grad_sq_at(u, c));
        return g;
    }

    /// CFL-compliant step bound for a slice with max squared gradient g_sq:
    ///   cfl_safety * min( h^2/(2n a_max), h/(p lambda^-1 G^(p-1)) ).
    Scalar cfl_limit(Scalar g_sq) const {
        const Scalar tiny = Scalar(1e-300);
        const Scalar n = Scalar(grid_.dim);
        const Scalar diff_bound = grid_.h * grid_.h / (Scalar(2) * n * a_max_ + tiny);
        const Scalar gmag = std::sqrt(g_sq);
        const Scalar gpow = (gmag > Scalar(0)) ? std::pow(gmag, spec_.p - Scalar(1)) : Scalar(0);
        const Scalar grad_bound = grid_.h / (spec_.p / spec_.lambda * gpow + tiny);
        return cfg_.cfl_safety * std::min(diff_bound, grad_bound);
    }

    /// One explicit Euler update of length dt starting at time t.
    /// Throws SolverError on CFL violation or non-finite output.
    /// Returns the max squared gradient of the INPUT slice.
    Scalar step_into(const ArrayX<Scalar>& u, Scalar t, Scalar dt, ArrayX<Scalar>& out) {
        const Index nc = grid_.cells_total();
        if (out.size() != nc) out.resize(nc);
        const Scalar p = spec_.p, lam = spec_.lambda;
        const ArrayX<Scalar>* fptr = &f_cache_;
        ArrayX<Scalar> f_local;
        if (!spec_.source.time_independent()) {
            const int j = int(std::llround(double((t - grid_.t_start) / grid_.dt)));
            f_local = spec_.source.sample_slice(grid_, std::clamp(j, 0, grid_.num_slices() - 1));
            fptr = &f_local;
        }
        const ArrayX<Scalar>& f = *fptr;

        Scalar max_sq = 0;
        for (Index c : interior_) {
            Scalar s_sq = 0;
            Scalar diff = 0;
            for (int d = 0; d < grid_.dim; ++d) {
                const Index st = strides_[d];
                const Scalar um = u[c - st], u0 = u[c], up = u[c + st];
                const Scalar bwd = (u0 - um) * inv_h_;
                const Scalar fwd = (up - u0) * inv_h_;
                const Scalar bp = std::max(bwd, Scalar(0));
                const Scalar fm = std::min(fwd, Scalar(0));
                s_sq += bp * bp + fm * fm;
                switch (diff_mode_) {
                    case DiffMode::None: break;
                    case DiffMode::IsoConst:
                        diff += a_iso_ * (up - Scalar(2) * u0 + um) * inv_h_ * inv_h_;
                        break;
                    case DiffMode::DiagField:
                    case DiffMode::FullField: {
                        const Scalar aR = faces_[size_t(d)][c];
                        const Scalar aL = faces_[size_t(d)][c - st];
                        diff += (aR * (up - u0) - aL * (u0 - um)) * inv_h_ * inv_h_;
                        break;
                    }
                }
            }
            if (diff_mode_ == DiffMode::FullField) diff += cross_div(u, c);
            max_sq = std::max(max_sq, s_sq);
            out[c] = u[c] + dt * (f[c] - pow_from_sq(s_sq, p) / lam + diff);
        }
        const Scalar limit = cfl_limit(max_sq);
        if (dt > limit * (Scalar(1) + Scalar(1e-12)))
            throw SolverError("CFL violation: dt=" + std::to_string(double(dt)) +
                              " exceeds limit " + std::to_string(double(limit)));
        const Scalar tb = t + dt;
        for (Index c : boundary_) out[c] = spec_.boundary_value(tb, c);
        if (!out.isFinite().all())
            throw SolverError("non-finite value produced at t=" + std::to_string(double(tb)));
        return max_sq;
    }

  private:
    enum class DiffMode { None, IsoConst, DiagField, FullField };

    Scalar grad_sq_at(const ArrayX<Scalar>& u, Index c) const {
        Scalar s_sq = 0;
        for (int d = 0; d < grid_.dim; ++d) {
            const Index st = strides_[d];
            const Scalar bwd = (u[c] - u[c - st]) * inv_h_;
            const Scalar fwd = (u[c + st] - u[c]) * inv_h_;
            const Scalar bp = std::max(bwd, Scalar(0));
            const Scalar fm = std::min(fwd, Scalar(0));
            s_sq += bp * bp + fm * fm;
        }
        return s_sq;
    }

    // flux form of the mixed second-order terms, centered at the faces
    Scalar cross_div(const ArrayX<Scalar>& u, Index c) const {
        const Scalar inv_2h = Scalar(0.5) * inv_h_;
        Scalar acc = 0;
        for (int i = 0; i < grid_.dim; ++i) {
            const Index si = strides_[i];
            Scalar flux_hi = 0, flux_lo = 0;
            for (int j = 0; j < grid_.dim; ++j) {
                if (j == i) continue;
                const Index sj = strides_[j];
                auto dj = [&](Index cell) { return (u[cell + sj] - u[cell - sj]) * inv_2h; };
                const Scalar a_c = amat_[size_t(c)](i, j);
                const Scalar a_hi = amat_[size_t(c + si)](i, j);
                const Scalar a_lo = amat_[size_t(c - si)](i, j);
                flux_hi += Scalar(0.5) * (a_c + a_hi) * Scalar(0.5) * (dj(c) + dj(c + si));
                flux_lo += Scalar(0.5) * (a_lo + a_c) * Scalar(0.5) * (dj(c - si) + dj(c));
            }
            acc += (flux_hi - flux_lo) * inv_h_;
        }
        return acc;
    }

    const ProblemSpec<Scalar>& spec_;
    SchemeConfig<Scalar> cfg_;
    const SpaceTimeGrid<Scalar>& grid_;
    Scalar inv_h_ = 1;
    std::vector<Index> strides_;
    std::vector<Index> interior_, boundary_;
    ArrayX<Scalar> f_cache_;
    DiffMode diff_mode_ = DiffMode::None;
    Scalar a_iso_ = 0, a_max_ = 0;
    std::vector<ArrayX<Scalar>> faces_;
    std::vector<MatrixX<Scalar>> amat_;
    bool monotone_ = true;
};

/// Single update u(t) -> u(t + dt); dt must satisfy the CFL invariant for
/// the current field, or SolverError is thrown.
template <typename Scalar>
ArrayX<Scalar> step(const ArrayX<Scalar>& u_t, Scalar t, Scalar dt,
                    const ProblemSpec<Scalar>& spec, const SchemeConfig<Scalar>& cfg) {
    Stepper<Scalar> st(spec, cfg);
    ArrayX<Scalar> out;
    st.step_into(u_t, t, dt, out);
    return out;
}

template <typename Scalar = double>
struct SolveResult {
    GridField<Scalar> field;
    RunMetadata meta;
};

/// March the full space-time field.  Output slices land on the grid times;
/// within each output interval the integrator subdivides as the CFL bound
/// demands (unless cfg.allow_substeps is off, in which case a violation is
/// an error).
template <typename Scalar>
SolveResult<Scalar> solve(const ProblemSpec<Scalar>& spec, const SchemeConfig<Scalar>& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& g = spec.grid;
    if (Index(spec.initial.size()) != g.cells_total())
        throw std::invalid_argument("solve: initial data size does not match the grid");

    Stepper<Scalar> stepper(spec, cfg);
    SolveResult<Scalar> res{GridField<Scalar>::zero(g), {}};
    auto& meta = res.meta;
    meta.non_monotone = !stepper.monotone_regime();
    meta.dt_min = std::numeric_limits<double>::infinity();
    meta.cfl_margin_min = std::numeric_limits<double>::infinity();

    ArrayX<Scalar> cur = spec.initial, next;
    res.field.slice(0) = cur;
    meta.sup_abs = double(cur.abs().maxCoeff());

    Scalar g_sq = stepper.max_grad_sq(cur);
    const Scalar clip = cfg.max_grad_clip ? *cfg.max_grad_clip
                                          : std::numeric_limits<Scalar>::infinity();

    for (int j = 0; j < g.time_steps(); ++j) {
        Scalar remaining = g.dt;
        while (remaining > Scalar(0)) {
            Scalar dt_s = remaining;
            if (cfg.allow_substeps) {
                const Scalar limit = stepper.cfl_limit(g_sq);
                const auto k = (long long)(std::ceil(double(remaining / limit) - 1e-12));
                if (k > 1) dt_s = remaining / Scalar(k);
            }
            const Scalar t = g.time_at(j) + (g.dt - remaining);
            g_sq = stepper.step_into(cur, t, dt_s, next);
            meta.cfl_margin_min =
                std::min(meta.cfl_margin_min, double(stepper.cfl_limit(g_sq) / dt_s));
            if (std::sqrt(g_sq) > clip) ++meta.grad_clip_exceeded;
            meta.max_gradient = std::max(meta.max_gradient, double(std::sqrt(g_sq)));
            meta.dt_min = std::min(meta.dt_min, double(dt_s));
            ++meta.total_substeps;
            cur.swap(next);
            remaining = (dt_s == remaining) ? Scalar(0) : remaining - dt_s;
        }
        res.field.slice(j + 1) = cur;
        meta.sup_abs = std::max(meta.sup_abs, double(cur.abs().maxCoeff()));
    }

    // record ||grad u||_p of the final slice (centered differences)
    {
        const auto grad = gradient_centered(res.field, g.time_steps());
        Scalar acc = 0;
        for (Index c = 0; c < g.cells_total(); ++c)
            acc += pow_from_sq(grad.row(c).matrix().squaredNorm(), spec.p);
        meta.grad_lp_final =
            double(std::pow(acc * std::pow(g.h, Scalar(g.dim)), Scalar(1) / spec.p));
    }
    meta.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// ---------------------------------------------------------------------------
// residuals

/// Smooth compactly supported space-time bump with closed-form derivatives:
/// a quintic radial plateau profile in |x - x_center| times the analogous
/// profile in |t - t_center|.
template <typename Scalar = double>
struct BumpTestFunction {
    Scalar t_center = 0, t_plateau = Scalar(0.25), t_support = Scalar(0.5);
    VectorX<Scalar> x_center;
    Scalar x_plateau = Scalar(0.5), x_support = Scalar(1);

    Scalar profile(Scalar r, Scalar plateau, Scalar support) const {
        if (r <= plateau) return Scalar(1);
        if (r >= support) return Scalar(0);
        return Scalar(1) - smoothstep((r - plateau) / (support - plateau));
    }
    Scalar profile_d(Scalar r, Scalar plateau, Scalar support) const {
        if (r <= plateau || r >= support) return Scalar(0);
        return -smoothstep_d1((r - plateau) / (support - plateau)) / (support - plateau);
    }

    Scalar value(Scalar t, const VectorX<Scalar>& x) const {
        return profile(std::abs(t - t_center), t_plateau, t_support) *
               profile((x - x_center).norm(), x_plateau, x_support);
    }
    Scalar dtime(Scalar t, const VectorX<Scalar>& x) const {
        const Scalar tau = t - t_center;
        const Scalar sgn = tau >= Scalar(0) ? Scalar(1) : Scalar(-1);
        return sgn * profile_d(std::abs(tau), t_plateau, t_support) *
               profile((x - x_center).norm(), x_plateau, x_support);
    }
    VectorX<Scalar> grad(Scalar t, const VectorX<Scalar>& x) const {
        const Scalar r = (x - x_center).norm();
        VectorX<Scalar> g = VectorX<Scalar>::Zero(x.size());
        if (r <= x_plateau || r >= x_support) return g;
        g = (x - x_center) / r;
        return profile(std::abs(t - t_center), t_plateau, t_support) *
               profile_d(r, x_plateau, x_support) * g;
    }
};

/// Weak residual of the distributional inequality against a test function:
///   iint [ -u dphi/dt + (|grad u|^p/Lambda - f) phi + (A grad u) . grad phi ].
/// Nonpositive (up to consistency error) for solved fields.
template <typename Scalar>
Scalar residual_dist(const GridField<Scalar>& u, const ProblemSpec<Scalar>& spec,
                     const BumpTestFunction<Scalar>& phi) {
    const auto& g = u.grid;
    if (phi.t_center - phi.t_support < g.t_start || phi.t_center + phi.t_support > g.t_end)
        throw std::invalid_argument("residual_dist: test function support leaves the time range");
    for (int d = 0; d < g.dim; ++d) {
        if (phi.x_center[d] - phi.x_support < g.domain_low(d) ||
            phi.x_center[d] + phi.x_support > g.domain_high(d))
            throw std::invalid_argument("residual_dist: test function support leaves the domain");
    }

    const Index nc = g.cells_total();
    Scalar acc = 0;
    for (int j = 0; j < g.num_slices(); ++j) {
        const Scalar t = g.time_at(j);
        if (std::abs(t - phi.t_center) >= phi.t_support) continue;
        const auto grad_u = gradient_centered(u, j);
        const auto s = u.slice(j);
        for (Index c = 0; c < nc; ++c) {
            const VectorX<Scalar> x = g.point(c);
            const Scalar r = (x - phi.x_center).norm();
            if (r >= phi.x_support) continue;
            const Scalar pv = phi.value(t, x);
            const Scalar pt = phi.dtime(t, x);
            const VectorX<Scalar> pg = phi.grad(t, x);
            const VectorX<Scalar> du = grad_u.row(c).transpose();
            const Scalar hterm = pow_from_sq(du.squaredNorm(), spec.p) / spec.lambda;
            const Scalar f = spec.source.value_at(g, j, c);
            const MatrixX<Scalar> A = spec.diffusion_at(c);
            acc += -s[c] * pt + (hterm - f) * pv + (A * du).dot(pg);
        }
    }
    return acc * g.dt * std::pow(g.h, Scalar(g.dim));
}

/// Pointwise viscosity-side residual
///   du/dt + Lambda |grad u|^p - Lambda_0 m^-(D2 u) + Lambda
/// with centered differences; nonnegative values are consistent with the
/// supersolution inequality at smooth points.
template <typename Scalar>
Scalar residual_visc(const GridField<Scalar>& u, const ProblemSpec<Scalar>& spec, int t_index,
                     Index cell) {
    const auto& g = u.grid;
    if (t_index < 1 || t_index > g.time_steps() - 1)
        throw std::out_of_range("residual_visc: time stencil out of range");
    const Eigen::ArrayXi idx = g.unravel(cell);
    for (int d = 0; d < g.dim; ++d)
        if (idx[d] < 1 || idx[d] > g.cells[d] - 2)
            throw std::out_of_range("residual_visc: spatial stencil out of range");

    const auto sm = u.slice(t_index - 1);
    const auto s0 = u.slice(t_index);
    const auto sp = u.slice(t_index + 1);
    const Scalar inv_h = Scalar(1) / g.h;
    const Scalar ut = (sp[cell] - sm[cell]) / (Scalar(2) * g.dt);

    VectorX<Scalar> du(g.dim);
    MatrixX<Scalar> H(g.dim, g.dim);
    for (int a = 0; a < g.dim; ++a) {
        const Index sa = g.stride(a);
        du[a] = (s0[cell + sa] - s0[cell - sa]) * Scalar(0.5) * inv_h;
        H(a, a) = (s0[cell + sa] - Scalar(2) * s0[cell] + s0[cell - sa]) * inv_h * inv_h;
        for (int b = a + 1; b < g.dim; ++b) {
            const Index sb = g.stride(b);
            const Scalar v = (s0[cell + sa + sb] - s0[cell + sa - sb] - s0[cell - sa + sb] +
                              s0[cell - sa - sb]) *
                             Scalar(0.25) * inv_h * inv_h;
            H(a, b) = v;
            H(b, a) = v;
        }
    }
    return ut + spec.lambda * pow_from_sq(du.squaredNorm(), spec.p) -
           spec.lambda0 * m_minus(H) + spec.lambda;
}

/// Fraction of interior points whose viscosity residual falls below -tol.
template <typename Scalar>
Scalar residual_visc_census(const GridField<Scalar>& u, const ProblemSpec<Scalar>& spec,
                            Scalar tol) {
    const auto& g = u.grid;
    long long total = 0, bad = 0;
    for (int j = 1; j <= g.time_steps() - 1; ++j) {
        for (Index c = 0; c < g.cells_total(); ++c) {
            const Eigen::ArrayXi idx = g.unravel(c);
            bool interior = true;
            for (int d = 0; d < g.dim; ++d)
                if (idx[d] < 1 || idx[d] > g.cells[d] - 2) { interior = false; break; }
            if (!interior) continue;
            ++total;
            if (residual_visc(u, spec, j, c) < -tol) ++bad;
        }
    }
    return total ? Scalar(bad) / Scalar(total) : Scalar(0);
}

}  // namespace hjdg
