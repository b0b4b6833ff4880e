#include "hjdg/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "hjdg/diagnostics.hpp"

namespace hjdg {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path);
    json j;
    is >> j;
    return j;
}

namespace {

Eigen::ArrayXi cells_from(const json& j, int n) {
    Eigen::ArrayXi cells(n);
    if (j.is_number_integer()) {
        cells.setConstant(j.get<int>());
    } else {
        if (int(j.size()) != n) throw std::runtime_error("grid.cells length must equal n");
        for (int d = 0; d < n; ++d) cells[d] = j.at(size_t(d)).get<int>();
    }
    return cells;
}

MatrixX<double> matrix_from(const json& j, int n) {
    MatrixX<double> m(n, n);
    if (j.is_number()) {
        if (n != 1) throw std::runtime_error("scalar diffusion value only valid for n = 1");
        m(0, 0) = j.get<double>();
        return m;
    }
    if (int(j.size()) != n) throw std::runtime_error("diffusion matrix must be n x n");
    for (int r = 0; r < n; ++r) {
        const auto& row = j.at(size_t(r));
        if (int(row.size()) != n) throw std::runtime_error("diffusion matrix must be n x n");
        for (int c = 0; c < n; ++c) m(r, c) = row.at(size_t(c)).get<double>();
    }
    return m;
}

VectorX<double> vector_from(const json& j, int n, double fill = 0.0) {
    VectorX<double> v = VectorX<double>::Constant(n, fill);
    if (j.is_null()) return v;
    if (j.is_number()) {
        v.setConstant(j.get<double>());
        return v;
    }
    if (int(j.size()) != n) throw std::runtime_error("vector length must equal n");
    for (int d = 0; d < n; ++d) v[d] = j.at(size_t(d)).get<double>();
    return v;
}

DiffusionSpec<double> diffusion_from(const json& j, int n) {
    if (j.is_null()) return DiffusionSpec<double>::scalar_constant();
    const std::string kind = j.value("kind", "scalar");
    const bool flip = j.value("flip_sign", false);
    if (kind == "scalar") return DiffusionSpec<double>::scalar_constant(flip);
    if (kind == "checkerboard") {
        const int block = j.value("block", 1);
        MatrixX<double> m1 = j.contains("m1") ? matrix_from(j.at("m1"), n)
                                              : MatrixX<double>::Identity(n, n);
        MatrixX<double> m2 = j.contains("m2") ? matrix_from(j.at("m2"), n)
                                              : MatrixX<double>(0.5 * MatrixX<double>::Identity(n, n));
        return DiffusionSpec<double>::checkerboard(block, std::move(m1), std::move(m2), flip);
    }
    throw std::runtime_error("unknown diffusion kind: " + kind);
}

SourceSpec<double> source_from(const json& j, int n) {
    if (j.is_null()) return SourceSpec<double>::zero();
    const std::string kind = j.value("kind", "zero");
    if (kind == "zero") return SourceSpec<double>::zero();
    if (kind == "constant") return SourceSpec<double>::constant(j.value("value", 0.0));
    if (kind == "radial") {
        VectorX<double> c = vector_from(j.contains("center") ? j.at("center") : json(), n);
        return SourceSpec<double>::radial_singular(j.value("value", 1.0), j.value("exponent", 0.25),
                                                   std::move(c));
    }
    throw std::runtime_error("unknown source kind: " + kind);
}

BoundarySpec<double> boundary_from(const json& j, int n) {
    if (j.is_null()) return BoundarySpec<double>::frozen_initial();
    const std::string kind = j.value("kind", "frozen");
    if (kind == "frozen") return BoundarySpec<double>::frozen_initial();
    if (kind == "affine") {
        VectorX<double> s = vector_from(j.contains("slope") ? j.at("slope") : json(), n);
        return BoundarySpec<double>::affine(std::move(s), j.value("tcoef", 0.0),
                                            j.value("offset", 0.0));
    }
    throw std::runtime_error("unknown boundary kind: " + kind);
}

}  // namespace

ArrayX<double> initial_from_json(const json& j, const SpaceTimeGrid<double>& grid) {
    const int n = grid.dim;
    const std::string kind = j.is_null() ? "constant" : j.value("kind", "constant");
    ArrayX<double> out(grid.cells_total());
    if (kind == "constant") {
        out.setConstant(j.is_null() ? 0.0 : j.value("value", 0.0));
        return out;
    }
    if (kind == "affine") {
        VectorX<double> s = vector_from(j.contains("slope") ? j.at("slope") : json(), n);
        const double o = j.value("offset", 0.0);
        for (Index c = 0; c < out.size(); ++c) out[c] = s.dot(grid.point(c)) + o;
        return out;
    }
    if (kind == "tanh") {
        const double height = j.value("height", 1.0);
        const double width = j.value("width", 0.1);
        const int axis = j.value("axis", 0);
        for (Index c = 0; c < out.size(); ++c)
            out[c] = height * std::tanh(grid.point(c)[axis] / width);
        return out;
    }
    if (kind == "sign") {
        const double height = j.value("height", 1.0);
        const int axis = j.value("axis", 0);
        for (Index c = 0; c < out.size(); ++c) {
            const double x = grid.point(c)[axis];
            out[c] = x >= 0 ? height : -height;
        }
        return out;
    }
    if (kind == "bump") {
        const double offset = j.value("offset", 0.0);
        const double height = j.value("height", 1.0);
        const double support = j.value("support", 1.0);
        const double plateau = j.value("plateau", 0.5 * support);
        VectorX<double> c0 = vector_from(j.contains("center") ? j.at("center") : json(), n);
        const auto phi = cutoff(support, plateau,
                                2.0 * smoothstep_max_slope<double>() / (support - plateau),
                                std::move(c0));
        for (Index c = 0; c < out.size(); ++c) out[c] = offset + height * phi.value_at(grid.point(c));
        return out;
    }
    if (kind == "sine") {
        const double amp = j.value("amplitude", 1.0);
        const double freq = j.value("frequency", 1.0);
        const int axis = j.value("axis", 0);
        for (Index c = 0; c < out.size(); ++c)
            out[c] = amp * std::sin(std::numbers::pi * freq * grid.point(c)[axis]);
        return out;
    }
    throw std::runtime_error("unknown initial kind: " + kind);
}

ProblemSpec<double> problem_from_json(const json& j) {
    ProblemSpec<double> spec;
    const int n = j.value("n", 1);
    spec.p = j.value("p", 3.0);
    spec.m = j.value("m", 2.0);
    spec.lambda = j.value("lambda", 1.0);
    spec.lambda0 = j.value("lambda0", 0.0);
    spec.epsilon = j.value("epsilon", 0.0);

    const auto& jg = j.at("grid");
    spec.grid = SpaceTimeGrid<double>::centered(n, cells_from(jg.at("cells"), n),
                                                jg.at("h").get<double>(), jg.at("dt").get<double>(),
                                                jg.value("t0", 0.0), jg.at("t1").get<double>());

    spec.diffusion = diffusion_from(j.contains("diffusion") ? j.at("diffusion") : json(), n);
    spec.source = source_from(j.contains("source") ? j.at("source") : json(), n);
    spec.boundary = boundary_from(j.contains("boundary") ? j.at("boundary") : json(), n);
    spec.initial = initial_from_json(j.contains("initial") ? j.at("initial") : json(), spec.grid);
    return spec;
}

SchemeConfig<double> scheme_from_json(const json& j) {
    SchemeConfig<double> cfg;
    if (j.is_null()) return cfg;
    cfg.cfl_safety = j.value("cfl_safety", 0.4);
    cfg.allow_substeps = j.value("allow_substeps", true);
    if (j.contains("max_grad_clip") && !j.at("max_grad_clip").is_null())
        cfg.max_grad_clip = j.at("max_grad_clip").get<double>();
    return cfg;
}

}  // namespace hjdg
