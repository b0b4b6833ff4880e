#pragma once

#include <string>

#include <json.hpp>

#include "hjdg/problem.hpp"
#include "hjdg/solver.hpp"

namespace hjdg {

nlohmann::json load_json(const std::string& path);

/// Problem config keys: n, p, m, lambda, lambda0, epsilon,
/// diffusion{kind,...}, source{kind,...}, grid{cells,h,dt,t0,t1},
/// initial{kind,...}, boundary{kind,...}.  The spatial domain is the
/// centered box cells*h.
ProblemSpec<double> problem_from_json(const nlohmann::json& j);

SchemeConfig<double> scheme_from_json(const nlohmann::json& j);

/// Initial-data kinds: constant, affine, tanh, sign, bump, sine.
ArrayX<double> initial_from_json(const nlohmann::json& j, const SpaceTimeGrid<double>& grid);

}  // namespace hjdg
