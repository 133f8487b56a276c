#include "spomix/synthetic.hpp"

#include "spomix/errors.hpp"
#include "spomix/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace spomix {

namespace {

void check_prob_table(const Matrix& m, const std::string& name) {
    if ((m.array() < 0.0).any() || (m.array() > 1.0).any()) {
        throw OutOfRange(name + " has entries outside [0,1]");
    }
}

double config_prob(const Matrix& bernoulli_table, int config, int u) {
    double p = 1.0;
    for (int c = 0; c < bernoulli_table.rows(); ++c) {
        const double pc = bernoulli_table(c, u);
        p *= ((config >> c) & 1) ? pc : (1.0 - pc);
    }
    return p;
}

Vector features_of(FeatureMap map, int config, int covariates) {
    if (map == FeatureMap::one_hot) {
        Vector f(2);
        f << (config == 0 ? 1.0 : 0.0), (config == 1 ? 1.0 : 0.0);
        return f;
    }
    Vector f(covariates);
    for (int c = 0; c < covariates; ++c) f[c] = static_cast<double>((config >> c) & 1);
    return f;
}

} // namespace

void ModelSpec::validate() const {
    if (k < 1) throw OutOfRange("k must be >= 1");
    if (p_u.size() != k) throw OutOfRange("p_u must have length k");
    if ((p_u.array() < 0.0).any() || std::abs(p_u.sum() - 1.0) > 1e-12) {
        throw OutOfRange("p_u is not a probability vector");
    }
    if (feature_map == FeatureMap::one_hot && (z_covariates() != 1 || x_covariates() != 1)) {
        throw OutOfRange("one-hot feature map requires a single Z and a single X covariate");
    }
    check_prob_table(p_z_given_u, "p_z_given_u");
    check_prob_table(p_x_given_u, "p_x_given_u");
    check_prob_table(p_t_given_zu, "p_t_given_zu");
    check_prob_table(p_y0_given_xu, "p_y0_given_xu");
    check_prob_table(p_y1_given_xu, "p_y1_given_xu");
    if (p_t_given_zu.rows() != z_configs() || p_t_given_zu.cols() != k) {
        throw OutOfRange("p_t_given_zu must be 2^zc x k");
    }
    if (p_y0_given_xu.rows() != x_configs() || p_y0_given_xu.cols() != k ||
        p_y1_given_xu.rows() != x_configs() || p_y1_given_xu.cols() != k) {
        throw OutOfRange("outcome tables must be 2^xc x k");
    }
    if ((p_t_given_zu.array() <= 0.0).any() || (p_t_given_zu.array() >= 1.0).any()) {
        throw OutOfRange("positivity violated: P(T=1|z,u) must be strictly inside (0,1)");
    }
}

Vector z_features(const ModelSpec& spec, int z_config) {
    return features_of(spec.feature_map, z_config, spec.z_covariates());
}

Vector x_features(const ModelSpec& spec, int x_config) {
    return features_of(spec.feature_map, x_config, spec.x_covariates());
}

double JointDistribution::total() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

ModelSpec hierarchy_model(double mu_zt, double mu_xy) {
    if (!(mu_zt >= 0.0 && mu_zt <= 1.0) || !(mu_xy >= 0.0 && mu_xy <= 1.0)) {
        throw OutOfRange("mu_zt and mu_xy must lie in [0,1]");
    }
    ModelSpec spec;
    spec.k = 2;
    spec.p_u = Vector::Constant(2, 0.5);
    spec.p_z_given_u.resize(1, 2);
    spec.p_z_given_u << 0.25, 0.75;
    spec.p_x_given_u = spec.p_z_given_u;

    // Rows index the conditioning covariate value, columns index U. This
    // orientation is what makes mu_zt=0 give T independent of Z and mu_zt=1
    // give T independent of U.
    spec.p_t_given_zu.resize(2, 2);
    spec.p_t_given_zu << 3.0 / 4.0, 1.0 / 4.0 + mu_zt / 2.0,
                         3.0 / 4.0 - mu_zt / 2.0, 1.0 / 4.0;

    spec.p_y0_given_xu.resize(2, 2);
    spec.p_y0_given_xu << 7.0 / 8.0, 1.0 / 8.0 + 6.0 * mu_xy / 8.0,
                          7.0 / 8.0 - 6.0 * mu_xy / 8.0, 1.0 / 8.0;
    spec.p_y1_given_xu.resize(2, 2);
    spec.p_y1_given_xu << 1.0 / 8.0, 7.0 / 8.0 - 6.0 * mu_xy / 8.0,
                          1.0 / 8.0 + 6.0 * mu_xy / 8.0, 7.0 / 8.0;

    spec.feature_map = FeatureMap::one_hot;
    spec.validate();
    return spec;
}

ModelSpec four_covariate_model() {
    ModelSpec spec;
    spec.k = 2;
    spec.p_u = Vector::Constant(2, 0.5);
    spec.p_z_given_u.resize(2, 2);
    spec.p_z_given_u << 0.20, 0.50,   // P(Z1=1|u) = 0.2 + 0.3u
                        0.58, 0.28;   // P(Z2=1|u) = 0.28 + 0.3(1-u)
    spec.p_x_given_u.resize(2, 2);
    spec.p_x_given_u << 0.36, 0.66,   // P(X1=1|u) = 0.36 + 0.3u
                        0.74, 0.44;   // P(X2=1|u) = 0.44 + 0.3(1-u)

    // T depends on U only: P(T=1|u) = 3/4 - u/2.
    spec.p_t_given_zu.resize(4, 2);
    for (int z = 0; z < 4; ++z) {
        spec.p_t_given_zu(z, 0) = 0.75;
        spec.p_t_given_zu(z, 1) = 0.25;
    }
    // P(Y=1|u,t) = 1/4 + t/4 + 1{u=t}/4, constant in X.
    spec.p_y0_given_xu.resize(4, 2);
    spec.p_y1_given_xu.resize(4, 2);
    for (int x = 0; x < 4; ++x) {
        spec.p_y0_given_xu(x, 0) = 0.50;
        spec.p_y0_given_xu(x, 1) = 0.25;
        spec.p_y1_given_xu(x, 0) = 0.50;
        spec.p_y1_given_xu(x, 1) = 0.75;
    }
    spec.feature_map = FeatureMap::direct;
    spec.validate();
    return spec;
}

Dataset sample(const ModelSpec& spec, std::int64_t n, std::uint64_t seed) {
    if (n < 1) throw OutOfRange("sample size must be >= 1");
    Rng rng(seed);

    const int zc = spec.z_covariates();
    const int xc = spec.x_covariates();
    Dataset d;
    d.z.resize(n, spec.d_z());
    d.x.resize(n, spec.d_x());
    d.t.resize(n);
    d.y.resize(n);
    d.u.emplace(n);

    // Fixed draw order per row (u, z bits, x bits, t, y0, y1) keeps the
    // stream layout stable. Both potential outcomes are drawn so that
    // individual-level ground truth exists even though estimators only ever
    // see y = y(t).
    for (std::int64_t i = 0; i < n; ++i) {
        const double du = rng.next_double();
        int u = 0;
        double acc = spec.p_u[0];
        while (u + 1 < spec.k && du >= acc) acc += spec.p_u[++u];

        int z = 0;
        for (int c = 0; c < zc; ++c) z |= (rng.bernoulli(spec.p_z_given_u(c, u)) ? 1 : 0) << c;
        int x = 0;
        for (int c = 0; c < xc; ++c) x |= (rng.bernoulli(spec.p_x_given_u(c, u)) ? 1 : 0) << c;

        const int t = rng.bernoulli(spec.p_t_given_zu(z, u)) ? 1 : 0;
        const int y0 = rng.bernoulli(spec.p_y0_given_xu(x, u)) ? 1 : 0;
        const int y1 = rng.bernoulli(spec.p_y1_given_xu(x, u)) ? 1 : 0;

        d.z.row(i) = z_features(spec, z).transpose();
        d.x.row(i) = x_features(spec, x).transpose();
        d.t[i] = t;
        d.y[i] = static_cast<double>(t == 1 ? y1 : y0);
        (*d.u)[i] = u;
    }
    return d;
}

GroundTruth exact_ground_truth(const ModelSpec& spec) {
    spec.validate();
    const int zc = spec.z_configs();
    const int xc = spec.x_configs();

    GroundTruth gt;
    gt.joint.k = spec.k;
    gt.joint.z_configs = zc;
    gt.joint.x_configs = xc;
    gt.joint.p.assign(static_cast<std::size_t>(spec.k) * zc * xc * 4, 0.0);
    gt.joint_potential.assign(static_cast<std::size_t>(spec.k) * zc * xc * 8, 0.0);

    for (int u = 0; u < spec.k; ++u) {
        for (int z = 0; z < zc; ++z) {
            const double pz = config_prob(spec.p_z_given_u, z, u);
            for (int x = 0; x < xc; ++x) {
                const double px = config_prob(spec.p_x_given_u, x, u);
                const double base = spec.p_u[u] * pz * px;
                const double pt1 = spec.p_t_given_zu(z, u);
                const double py0 = spec.p_y0_given_xu(x, u);
                const double py1 = spec.p_y1_given_xu(x, u);
                for (int t = 0; t < 2; ++t) {
                    const double pt = t == 1 ? pt1 : 1.0 - pt1;
                    for (int y0 = 0; y0 < 2; ++y0) {
                        const double q0 = y0 == 1 ? py0 : 1.0 - py0;
                        for (int y1 = 0; y1 < 2; ++y1) {
                            const double q1 = y1 == 1 ? py1 : 1.0 - py1;
                            const double p = base * pt * q0 * q1;
                            const std::size_t idx = static_cast<std::size_t>(
                                ((((u * zc + z) * xc + x) * 2 + t) * 2 + y0) * 2 + y1);
                            gt.joint_potential[idx] += p;
                            gt.joint.at(u, z, x, t, t == 1 ? y1 : y0) += p;
                        }
                    }
                }
            }
        }
    }

    // E[R|u] = sum_x P(x|u) (P(Y1=1|x,u) - P(Y0=1|x,u)); canonical order.
    Vector per_class(spec.k);
    for (int u = 0; u < spec.k; ++u) {
        double e = 0.0;
        for (int x = 0; x < xc; ++x) {
            e += config_prob(spec.p_x_given_u, x, u) *
                 (spec.p_y1_given_xu(x, u) - spec.p_y0_given_xu(x, u));
        }
        per_class[u] = e;
    }
    gt.ate = spec.p_u.dot(per_class);

    std::vector<int> order(static_cast<std::size_t>(spec.k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (per_class[a] != per_class[b]) return per_class[a] < per_class[b];
        return spec.p_u[a] > spec.p_u[b];
    });
    gt.mte.k = spec.k;
    gt.mte.weights.resize(spec.k);
    gt.mte.effects.resize(spec.k);
    for (int i = 0; i < spec.k; ++i) {
        gt.mte.weights[i] = spec.p_u[order[static_cast<std::size_t>(i)]];
        gt.mte.effects[i] = per_class[order[static_cast<std::size_t>(i)]];
    }
    return gt;
}

MomentBundle exact_bundle(const ModelSpec& spec) {
    const GroundTruth gt = exact_ground_truth(spec);
    const int zc = spec.z_configs();
    const int xc = spec.x_configs();

    std::vector<Vector> zf(static_cast<std::size_t>(zc));
    std::vector<Vector> xf(static_cast<std::size_t>(xc));
    for (int z = 0; z < zc; ++z) zf[static_cast<std::size_t>(z)] = z_features(spec, z);
    for (int x = 0; x < xc; ++x) xf[static_cast<std::size_t>(x)] = x_features(spec, x);

    MomentBundle b;
    b.m_x = Vector::Zero(spec.d_x());
    double p_t[2] = {0.0, 0.0};
    for (int t = 0; t < 2; ++t) {
        b.m_zx_t[t] = Matrix::Zero(spec.d_z(), spec.d_x());
        b.m_zy_t[t] = Vector::Zero(spec.d_z());
        b.m_zxy_t[t] = Matrix::Zero(spec.d_z(), spec.d_x());
    }

    for (int u = 0; u < spec.k; ++u) {
        for (int z = 0; z < zc; ++z) {
            for (int x = 0; x < xc; ++x) {
                for (int t = 0; t < 2; ++t) {
                    for (int y = 0; y < 2; ++y) {
                        const double p = gt.joint.at(u, z, x, t, y);
                        if (p == 0.0) continue;
                        p_t[t] += p;
                        const Vector& th = zf[static_cast<std::size_t>(z)];
                        const Vector& ph = xf[static_cast<std::size_t>(x)];
                        b.m_x += p * ph;
                        b.m_zx_t[t] += p * th * ph.transpose();
                        if (y == 1) {
                            b.m_zy_t[t] += p * th;
                            b.m_zxy_t[t] += p * th * ph.transpose();
                        }
                    }
                }
            }
        }
    }
    for (int t = 0; t < 2; ++t) {
        if (p_t[t] <= 0.0) throw EmptyArm("arm " + std::to_string(t) + " has zero population mass");
        b.m_zx_t[t] /= p_t[t];
        b.m_zy_t[t] /= p_t[t];
        b.m_zxy_t[t] /= p_t[t];
    }
    b.exact = true;
    return b;
}

} // namespace spomix
