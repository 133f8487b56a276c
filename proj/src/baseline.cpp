#include "spomix/baseline.hpp"

#include "spomix/errors.hpp"
#include "spomix/moment_problem.hpp"
#include "spomix/rng.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace spomix {

namespace {

struct DecodedColumn {
    std::vector<int> values;
    int cardinality = 0;
};

// One-hot rows decode to the indicated category; otherwise 0/1 columns are
// read as bits of a packed value.
DecodedColumn decode_block(const Matrix& m, const char* name) {
    const Index n = m.rows();
    const Index cols = m.cols();
    if (cols > 16) throw NonBinaryData(std::string(name) + " has too many columns to bit-pack");

    bool one_hot = cols >= 2;
    for (Index i = 0; i < n && one_hot; ++i) {
        double s = 0.0;
        for (Index j = 0; j < cols; ++j) s += m(i, j);
        one_hot = (s == 1.0);
    }
    DecodedColumn out;
    out.values.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        int packed = 0;
        int hot = -1;
        for (Index j = 0; j < cols; ++j) {
            const double v = m(i, j);
            if (v != 0.0 && v != 1.0) {
                throw NonBinaryData(std::string(name) + " is not binary at row " + std::to_string(i) +
                                    ", column " + std::to_string(j));
            }
            if (v == 1.0) {
                packed |= 1 << j;
                hot = static_cast<int>(j);
            }
        }
        out.values[static_cast<std::size_t>(i)] = one_hot ? hot : packed;
    }
    out.cardinality = one_hot ? static_cast<int>(cols) : (1 << cols);
    return out;
}

double frobenius_residual(const JointTensor& t, const Matrix& a, const Matrix& b, const Matrix& c) {
    const int k = static_cast<int>(a.cols());
    double acc = 0.0;
    for (int i = 0; i < t.dims[0]; ++i) {
        for (int j = 0; j < t.dims[1]; ++j) {
            for (int l = 0; l < t.dims[2]; ++l) {
                double fit = 0.0;
                for (int r = 0; r < k; ++r) fit += a(i, r) * b(j, r) * c(l, r);
                const double d = t.at(i, j, l) - fit;
                acc += d * d;
            }
        }
    }
    return std::sqrt(acc);
}

Matrix mttkrp(const JointTensor& t, int mode, const Matrix& f1, const Matrix& f2) {
    // mode 0: out(i,r) = sum_{j,l} T(i,j,l) f1(j,r) f2(l,r), f1 = B, f2 = C
    // mode 1: out(j,r) = sum_{i,l} T(i,j,l) f1(i,r) f2(l,r), f1 = A, f2 = C
    // mode 2: out(l,r) = sum_{i,j} T(i,j,l) f1(i,r) f2(j,r), f1 = A, f2 = B
    const int k = static_cast<int>(f1.cols());
    Matrix out = Matrix::Zero(t.dims[static_cast<std::size_t>(mode)], k);
    for (int i = 0; i < t.dims[0]; ++i) {
        for (int j = 0; j < t.dims[1]; ++j) {
            for (int l = 0; l < t.dims[2]; ++l) {
                const double v = t.at(i, j, l);
                if (v == 0.0) continue;
                for (int r = 0; r < k; ++r) {
                    switch (mode) {
                        case 0: out(i, r) += v * f1(j, r) * f2(l, r); break;
                        case 1: out(j, r) += v * f1(i, r) * f2(l, r); break;
                        default: out(l, r) += v * f1(i, r) * f2(j, r); break;
                    }
                }
            }
        }
    }
    return out;
}

// Sign indeterminacy: (a,b,c) and any sign pattern with product +1 describe
// the same component. Pick the pattern losing the least mass to the
// subsequent clip at zero.
void canonicalize_signs(Matrix& a, Matrix& b, Matrix& c) {
    static constexpr std::array<std::array<int, 3>, 4> kPatterns{
        {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}};
    const int k = static_cast<int>(a.cols());
    Matrix* f[3] = {&a, &b, &c};
    for (int r = 0; r < k; ++r) {
        double best_loss = std::numeric_limits<double>::max();
        std::array<int, 3> best = kPatterns[0];
        for (const auto& pat : kPatterns) {
            double loss = 0.0;
            for (int m = 0; m < 3; ++m) {
                loss += (-pat[m] * f[m]->col(r)).cwiseMax(0.0).sum();
            }
            if (loss < best_loss) {
                best_loss = loss;
                best = pat;
            }
        }
        for (int m = 0; m < 3; ++m) f[m]->col(r) *= best[m];
    }
}

} // namespace

double JointTensor::total() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
}

JointTensor joint_tensor(const Dataset& d) {
    if (d.n() == 0) throw EmptyDataset("joint_tensor on empty dataset");
    const DecodedColumn z = decode_block(d.z, "z");
    const DecodedColumn x = decode_block(d.x, "x");

    JointTensor t;
    t.dims = {z.cardinality, x.cardinality, 4};
    t.p.assign(static_cast<std::size_t>(z.cardinality) * x.cardinality * 4, 0.0);
    const double w = 1.0 / static_cast<double>(d.n());
    for (Index i = 0; i < d.n(); ++i) {
        const double yv = d.y[i];
        if (yv != 0.0 && yv != 1.0) {
            throw NonBinaryData("y is not binary at row " + std::to_string(i));
        }
        const int s = 2 * d.t[i] + static_cast<int>(yv);
        t.at(z.values[static_cast<std::size_t>(i)], x.values[static_cast<std::size_t>(i)], s) += w;
    }
    return t;
}

JointTensor joint_tensor(const JointDistribution& joint) {
    JointTensor t;
    t.dims = {joint.z_configs, joint.x_configs, 4};
    t.p.assign(static_cast<std::size_t>(joint.z_configs) * joint.x_configs * 4, 0.0);
    for (int u = 0; u < joint.k; ++u) {
        for (int z = 0; z < joint.z_configs; ++z) {
            for (int x = 0; x < joint.x_configs; ++x) {
                for (int tt = 0; tt < 2; ++tt) {
                    for (int y = 0; y < 2; ++y) {
                        t.at(z, x, 2 * tt + y) += joint.at(u, z, x, tt, y);
                    }
                }
            }
        }
    }
    return t;
}

MixtureFactors cp_als(const JointTensor& t, int k, int restarts, std::uint64_t seed,
                      CpAlsInfo* info, const CpAlsOptions& opts) {
    if (k < 1) throw OutOfRange("cp_als needs k >= 1");
    if (restarts < 1) throw OutOfRange("cp_als needs restarts >= 1");

    Matrix best_f[3];
    CpAlsInfo best_info;
    double best_res = std::numeric_limits<double>::max();

    for (int restart = 0; restart < restarts; ++restart) {
        Rng rng(Rng::derive({seed, static_cast<std::uint64_t>(restart)}));
        Matrix f[3];
        for (int m = 0; m < 3; ++m) {
            f[m].resize(t.dims[static_cast<std::size_t>(m)], k);
            for (Index i = 0; i < f[m].rows(); ++i) {
                for (Index j = 0; j < f[m].cols(); ++j) f[m](i, j) = rng.next_double();
            }
        }

        CpAlsInfo run;
        double prev = std::numeric_limits<double>::max();
        for (int sweep = 0; sweep < opts.max_iterations; ++sweep) {
            for (int mode = 0; mode < 3; ++mode) {
                const Matrix& f1 = f[mode == 0 ? 1 : 0];
                const Matrix& f2 = f[mode == 2 ? 1 : 2];
                const Matrix gram = (f1.transpose() * f1).cwiseProduct(f2.transpose() * f2);
                const Matrix rhs = mttkrp(t, mode, f1, f2);
                f[mode] = gram.transpose().colPivHouseholderQr().solve(rhs.transpose()).transpose();
            }
            const double res = frobenius_residual(t, f[0], f[1], f[2]);
            run.residual_trace.push_back(res);
            run.iterations = sweep + 1;
            run.residual = res;
            if (std::abs(prev - res) < opts.rel_change_tolerance * std::max(res, 1e-30)) {
                run.converged = true;
                break;
            }
            prev = res;
        }
        if (run.residual < best_res) {
            best_res = run.residual;
            best_info = std::move(run);
            for (int m = 0; m < 3; ++m) best_f[m] = f[m];
        }
    }

    canonicalize_signs(best_f[0], best_f[1], best_f[2]);

    Vector weights = Vector::Ones(k);
    for (int m = 0; m < 3; ++m) {
        best_f[m] = best_f[m].cwiseMax(0.0);
        for (int r = 0; r < k; ++r) {
            const double s = best_f[m].col(r).sum();
            if (s > 0.0) {
                best_f[m].col(r) /= s;
                weights[r] *= s;
            } else {
                // Component vanished under clipping: keep a valid column,
                // kill its weight.
                best_f[m].col(r).setConstant(1.0 / static_cast<double>(best_f[m].rows()));
                weights[r] = 0.0;
            }
        }
    }
    weights = project_to_simplex(weights);

    // Canonical component order: descending weight, ties by lexicographic
    // f_s column.
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (weights[a] != weights[b]) return weights[a] > weights[b];
        for (Index i = 0; i < best_f[2].rows(); ++i) {
            if (best_f[2](i, a) != best_f[2](i, b)) return best_f[2](i, a) < best_f[2](i, b);
        }
        return false;
    });

    MixtureFactors out;
    out.weights.resize(k);
    out.f_z.resize(t.dims[0], k);
    out.f_x.resize(t.dims[1], k);
    out.f_s.resize(t.dims[2], k);
    for (int i = 0; i < k; ++i) {
        const int r = order[static_cast<std::size_t>(i)];
        out.weights[i] = weights[r];
        out.f_z.col(i) = best_f[0].col(r);
        out.f_x.col(i) = best_f[1].col(r);
        out.f_s.col(i) = best_f[2].col(r);
    }
    if (info) *info = best_info;
    return out;
}

double tv_distance(const JointDistribution& truth, const MixtureFactors& est) {
    const int k = static_cast<int>(est.weights.size());
    if (truth.k != k || est.f_z.rows() != truth.z_configs || est.f_x.rows() != truth.x_configs ||
        est.f_s.rows() != 4) {
        throw DimensionMismatch("tv_distance: truth table and factor dimensions disagree");
    }

    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::max();
    do {
        double l1 = 0.0;
        for (int u = 0; u < k; ++u) {
            const int r = perm[static_cast<std::size_t>(u)];
            for (int z = 0; z < truth.z_configs; ++z) {
                for (int x = 0; x < truth.x_configs; ++x) {
                    for (int t = 0; t < 2; ++t) {
                        for (int y = 0; y < 2; ++y) {
                            const double fit = est.weights[r] * est.f_z(z, r) * est.f_x(x, r) *
                                               est.f_s(2 * t + y, r);
                            l1 += std::abs(truth.at(u, z, x, t, y) - fit);
                        }
                    }
                }
            }
        }
        best = std::min(best, 0.5 * l1);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double mte_error(const MixtureOfEffects& truth, const MixtureOfEffects& est) {
    if (truth.k != est.k) {
        throw DimensionMismatch("mte_error: component counts differ (" + std::to_string(truth.k) +
                                " vs " + std::to_string(est.k) + ")");
    }
    const int k = truth.k;
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::max();
    do {
        double d = 0.0;
        for (int i = 0; i < k; ++i) {
            const int j = perm[static_cast<std::size_t>(i)];
            const double dw = truth.weights[i] - est.weights[j];
            const double de = truth.effects[i] - est.effects[j];
            d += dw * dw + de * de;
        }
        best = std::min(best, d);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double ate_error(double truth, double est) {
    const double d = truth - est;
    return d * d;
}

} // namespace spomix
