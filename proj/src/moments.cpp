#include "spomix/moments.hpp"

#include "spomix/dataset.hpp"
#include "spomix/errors.hpp"
#include "spomix/kernels.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace spomix {

namespace {

// Columns of the (column-major) Eigen matrices are contiguous, so the
// reduction kernels can run straight over them.
Vector column_means(const Matrix& m) {
    const auto n = static_cast<std::size_t>(m.rows());
    Vector out(m.cols());
    for (Index j = 0; j < m.cols(); ++j) {
        out[j] = kernels::sum(m.col(j).data(), n) / static_cast<double>(n);
    }
    return out;
}

Matrix cross(const Matrix& z, const Matrix& x) {
    const auto n = static_cast<std::size_t>(z.rows());
    Matrix out(z.cols(), x.cols());
    for (Index i = 0; i < z.cols(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
            out(i, j) = kernels::dot(z.col(i).data(), x.col(j).data(), n) / static_cast<double>(n);
        }
    }
    return out;
}

Matrix cross_weighted(const Matrix& z, const Matrix& x, const Vector& y) {
    const auto n = static_cast<std::size_t>(z.rows());
    Matrix out(z.cols(), x.cols());
    for (Index i = 0; i < z.cols(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) {
            out(i, j) =
                kernels::dot3(z.col(i).data(), x.col(j).data(), y.data(), n) / static_cast<double>(n);
        }
    }
    return out;
}

Vector cross_y(const Matrix& z, const Vector& y) {
    const auto n = static_cast<std::size_t>(z.rows());
    Vector out(z.cols());
    for (Index i = 0; i < z.cols(); ++i) {
        out[i] = kernels::dot(z.col(i).data(), y.data(), n) / static_cast<double>(n);
    }
    return out;
}

} // namespace

Vector mean_vector(const Dataset& d) {
    if (d.n() == 0) throw EmptyDataset("mean_vector on empty dataset");
    return column_means(d.x);
}

Matrix cross_moment(const Dataset& d, bool weight_by_outcome) {
    if (d.n() == 0) throw EmptyDataset("cross_moment on empty dataset");
    return weight_by_outcome ? cross_weighted(d.z, d.x, d.y) : cross(d.z, d.x);
}

MomentBundle estimate_bundle(const Dataset& d) {
    if (d.n() == 0) throw EmptyDataset("estimate_bundle on empty dataset");
    auto [arm0, arm1] = split_by_treatment(d);

    MomentBundle b;
    b.m_x = column_means(d.x);
    const Dataset* arms[2] = {&arm0, &arm1};
    for (int t = 0; t < 2; ++t) {
        const Dataset& a = *arms[t];
        b.m_zx_t[t] = cross(a.z, a.x);
        b.m_zy_t[t] = cross_y(a.z, a.y);
        b.m_zxy_t[t] = cross_weighted(a.z, a.x, a.y);
        b.n_t[t] = a.n();
    }
    b.exact = false;
    return b;
}

ConditionDiagnostic condition_diagnostic(const MomentBundle& bundle, double rel_tolerance) {
    ConditionDiagnostic diag;
    diag.rel_tolerance = rel_tolerance;
    for (int t = 0; t < 2; ++t) {
        Eigen::JacobiSVD<Matrix> svd(bundle.m_zx_t[t]);
        const auto& sv = svd.singularValues();
        ArmConditioning& arm = diag.arm[t];
        arm.sigma_max = sv.size() > 0 ? sv[0] : 0.0;
        arm.sigma_min = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
        arm.condition = arm.sigma_min > 0.0 ? arm.sigma_max / arm.sigma_min
                                            : std::numeric_limits<double>::infinity();
        arm.rank_deficient = arm.sigma_min < rel_tolerance * arm.sigma_max || arm.sigma_max == 0.0;
    }
    return diag;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j.at(0).size()) : 0;
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    }
    return m;
}

nlohmann::json vector_to_json(const Vector& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Vector vector_from_json(const nlohmann::json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (Index i = 0; i < v.size(); ++i) v[i] = j.at(i).get<double>();
    return v;
}

} // namespace

nlohmann::json bundle_to_json(const MomentBundle& b) {
    return nlohmann::json{
        {"m_x", vector_to_json(b.m_x)},
        {"m_zx_t", {matrix_to_json(b.m_zx_t[0]), matrix_to_json(b.m_zx_t[1])}},
        {"m_zy_t", {vector_to_json(b.m_zy_t[0]), vector_to_json(b.m_zy_t[1])}},
        {"m_zxy_t", {matrix_to_json(b.m_zxy_t[0]), matrix_to_json(b.m_zxy_t[1])}},
        {"n_t", {b.n_t[0], b.n_t[1]}},
        {"exact", b.exact},
    };
}

MomentBundle bundle_from_json(const nlohmann::json& j) {
    MomentBundle b;
    b.m_x = vector_from_json(j.at("m_x"));
    for (int t = 0; t < 2; ++t) {
        b.m_zx_t[t] = matrix_from_json(j.at("m_zx_t").at(t));
        b.m_zy_t[t] = vector_from_json(j.at("m_zy_t").at(t));
        b.m_zxy_t[t] = matrix_from_json(j.at("m_zxy_t").at(t));
        b.n_t[t] = j.at("n_t").at(t).get<std::int64_t>();
    }
    b.exact = j.at("exact").get<bool>();
    return b;
}

} // namespace spomix
