#include "spomix/spo.hpp"

#include "spomix/errors.hpp"

#include <Eigen/Dense>

#include <string>

namespace spomix {

namespace {

struct ArmSolver {
    Eigen::ColPivHouseholderQR<Matrix> qr;
    double sigma_min = 0.0;
    double sigma_max = 0.0;
};

void check_square(const MomentBundle& b) {
    if (b.d_z() != b.d_x()) {
        throw DimensionMismatch("arm matrices must be square for the coefficient solve (d_z=" +
                                std::to_string(b.d_z()) + ", d_x=" + std::to_string(b.d_x()) + ")");
    }
    for (int t = 0; t < 2; ++t) {
        if (b.m_zx_t[t].rows() != b.d_z() || b.m_zx_t[t].cols() != b.d_x() ||
            b.m_zy_t[t].size() != b.d_z() || b.m_zxy_t[t].rows() != b.d_z() ||
            b.m_zxy_t[t].cols() != b.d_x()) {
            throw DimensionMismatch("inconsistent bundle dimensions in arm " + std::to_string(t));
        }
    }
}

ArmSolver factor_arm(const MomentBundle& b, int arm, const SpoSolveOptions& opts) {
    Matrix m = b.m_zx_t[arm];
    if (opts.ridge != 0.0) m.diagonal().array() += opts.ridge;

    Eigen::JacobiSVD<Matrix> svd(m);
    ArmSolver solver;
    solver.sigma_max = svd.singularValues()[0];
    solver.sigma_min = svd.singularValues()[svd.singularValues().size() - 1];
    if (solver.sigma_max == 0.0 || solver.sigma_min < opts.rel_tolerance * solver.sigma_max) {
        throw SingularMomentMatrix("E[Z,X|T=" + std::to_string(arm) + "] is numerically singular (sigma_min=" +
                                   std::to_string(solver.sigma_min) + ", sigma_max=" +
                                   std::to_string(solver.sigma_max) + ")");
    }
    solver.qr.compute(m);
    return solver;
}

SpoCoefficients first_from(const MomentBundle& b, const ArmSolver& s0, const ArmSolver& s1) {
    SpoCoefficients c;
    c.order = 1;
    c.alpha = s1.qr.solve(b.m_zy_t[1]);
    c.beta = s0.qr.solve(b.m_zy_t[0]);
    c.gamma = c.alpha - c.beta;
    return c;
}

SpoCoefficients next_from(const MomentBundle& b, const SpoCoefficients& prev, const ArmSolver& s0,
                          const ArmSolver& s1) {
    if (prev.gamma.size() != b.d_x()) {
        throw DimensionMismatch("previous gamma has length " + std::to_string(prev.gamma.size()) +
                                ", expected " + std::to_string(b.d_x()));
    }
    SpoCoefficients c;
    c.order = prev.order + 1;
    c.alpha = s1.qr.solve(b.m_zxy_t[1] * prev.gamma);
    c.beta = s0.qr.solve(b.m_zxy_t[0] * prev.gamma);
    c.gamma = c.alpha - c.beta;
    return c;
}

} // namespace

SpoCoefficients first_moment_coeffs(const MomentBundle& bundle, const SpoSolveOptions& opts) {
    check_square(bundle);
    const ArmSolver s0 = factor_arm(bundle, 0, opts);
    const ArmSolver s1 = factor_arm(bundle, 1, opts);
    return first_from(bundle, s0, s1);
}

SpoCoefficients next_moment_coeffs(const MomentBundle& bundle, const SpoCoefficients& prev,
                                   const SpoSolveOptions& opts) {
    check_square(bundle);
    const ArmSolver s0 = factor_arm(bundle, 0, opts);
    const ArmSolver s1 = factor_arm(bundle, 1, opts);
    return next_from(bundle, prev, s0, s1);
}

double ate(const MomentBundle& bundle, const SpoSolveOptions& opts) {
    return bundle.m_x.dot(first_moment_coeffs(bundle, opts).gamma);
}

MomentSequence response_moment_sequence(const MomentBundle& bundle, int k,
                                        const SpoSolveOptions& opts) {
    if (k < 1) throw OutOfRange("component count must be >= 1, got " + std::to_string(k));
    check_square(bundle);
    // One factorization per arm, reused across every order.
    const ArmSolver s0 = factor_arm(bundle, 0, opts);
    const ArmSolver s1 = factor_arm(bundle, 1, opts);

    MomentSequence seq;
    seq.k = k;
    seq.values.resize(2 * k - 1);
    SpoCoefficients c = first_from(bundle, s0, s1);
    seq.values[0] = bundle.m_x.dot(c.gamma);
    for (int order = 2; order <= 2 * k - 1; ++order) {
        c = next_from(bundle, c, s0, s1);
        seq.values[order - 1] = bundle.m_x.dot(c.gamma);
    }
    return seq;
}

double ate_via_pseudoinverse(const MomentBundle& bundle, double rel_tolerance) {
    if (bundle.d_z() < bundle.d_x()) {
        throw RankDeficient("pseudoinverse route needs d_z >= d_x (got d_z=" +
                            std::to_string(bundle.d_z()) + ", d_x=" + std::to_string(bundle.d_x()) + ")");
    }
    double outcome_moment[2];
    for (int t = 0; t < 2; ++t) {
        // E[X,Z|t] = E[Z,X|t]^T, d_x x d_z with d_x <= d_z.
        const Matrix a = bundle.m_zx_t[t].transpose();
        Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto& sv = svd.singularValues();
        if (sv[0] == 0.0 || sv[sv.size() - 1] < rel_tolerance * sv[0]) {
            throw RankDeficient("E[X,Z|T=" + std::to_string(t) + "] has no left inverse (sigma_min=" +
                                std::to_string(sv[sv.size() - 1]) + ")");
        }
        // E[Y^(t)] = E[Y,Z|t] pinv(E[X,Z|t]) E[X]
        const Vector tmp = svd.matrixU() * (sv.cwiseInverse().asDiagonal() *
                                            (svd.matrixV().transpose() * bundle.m_zy_t[t]));
        outcome_moment[t] = tmp.dot(bundle.m_x);
    }
    return outcome_moment[1] - outcome_moment[0];
}

} // namespace spomix
