#pragma once

#include <cmath>

namespace hjdg {

// Quintic smoothstep on [0,1]: s(0)=0, s(1)=1, s' = s'' = 0 at both ends.
// Used as the canonical C^2 transition for every cutoff and bump profile,
// so that derivative extrema are exact constants of the construction.

template <typename Scalar>
constexpr Scalar smoothstep(Scalar t) {
    if (t <= Scalar(0)) return Scalar(0);
    if (t >= Scalar(1)) return Scalar(1);
    return t * t * t * (Scalar(10) + t * (Scalar(-15) + Scalar(6) * t));
}

template <typename Scalar>
constexpr Scalar smoothstep_d1(Scalar t) {
    if (t <= Scalar(0) || t >= Scalar(1)) return Scalar(0);
    const Scalar u = t * (Scalar(1) - t);
    return Scalar(30) * u * u;
}

template <typename Scalar>
constexpr Scalar smoothstep_d2(Scalar t) {
    if (t <= Scalar(0) || t >= Scalar(1)) return Scalar(0);
    return Scalar(60) * t * (Scalar(1) - t) * (Scalar(1) - Scalar(2) * t);
}

// sup |s'| = 15/8 at t = 1/2
template <typename Scalar>
constexpr Scalar smoothstep_max_slope() {
    return Scalar(15) / Scalar(8);
}

// sup |s''| = 10/sqrt(3) at t = (3 -/+ sqrt(3))/6
template <typename Scalar>
inline Scalar smoothstep_max_curvature() {
    return Scalar(10) / std::sqrt(Scalar(3));
}

}  // namespace hjdg
