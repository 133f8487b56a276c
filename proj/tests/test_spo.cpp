#include "spomix/spo.hpp"

#include "spomix/errors.hpp"
#include "spomix/rng.hpp"
#include "spomix/synthetic.hpp"

#include <doctest.h>

#include <cmath>

using namespace spomix;

namespace {

MomentBundle identity_bundle(const Vector& zy1, const Vector& zy0) {
    MomentBundle b;
    const Index d = zy1.size();
    b.m_x = Vector::Constant(d, 1.0 / static_cast<double>(d));
    b.m_zx_t[0] = b.m_zx_t[1] = Matrix::Identity(d, d);
    b.m_zy_t[1] = zy1;
    b.m_zy_t[0] = zy0;
    b.m_zxy_t[0] = b.m_zxy_t[1] = Matrix::Identity(d, d);
    return b;
}

MomentBundle random_bundle(std::uint64_t seed, Index d = 2) {
    Rng rng(seed);
    auto mat = [&](Index r, Index c) {
        Matrix m(r, c);
        for (Index i = 0; i < r; ++i) {
            for (Index j = 0; j < c; ++j) m(i, j) = rng.next_double();
        }
        return m;
    };
    MomentBundle b;
    b.m_x = mat(d, 1);
    for (int t = 0; t < 2; ++t) {
        b.m_zx_t[t] = mat(d, d) + 2.0 * Matrix::Identity(d, d); // well-conditioned
        b.m_zy_t[t] = mat(d, 1);
        b.m_zxy_t[t] = mat(d, d);
    }
    return b;
}

// Left-multiplies every Z-indexed moment object by an invertible map; the
// coefficients must not notice.
MomentBundle reparameterize_z(const MomentBundle& b, const Matrix& a) {
    MomentBundle out = b;
    for (int t = 0; t < 2; ++t) {
        out.m_zx_t[t] = a * b.m_zx_t[t];
        out.m_zy_t[t] = a * b.m_zy_t[t];
        out.m_zxy_t[t] = a * b.m_zxy_t[t];
    }
    return out;
}

ModelSpec random_constant_treatment_spec(std::uint64_t seed) {
    Rng rng(seed);
    ModelSpec spec;
    spec.k = 2;
    spec.p_u.resize(2);
    const double pu = 0.2 + 0.6 * rng.next_double();
    spec.p_u << pu, 1.0 - pu;
    auto table = [&](Index rows, double lo, double hi) {
        Matrix m(rows, 2);
        for (Index i = 0; i < rows; ++i) {
            for (Index j = 0; j < 2; ++j) m(i, j) = lo + (hi - lo) * rng.next_double();
        }
        return m;
    };
    spec.p_z_given_u = table(1, 0.1, 0.9);
    spec.p_x_given_u = table(1, 0.1, 0.9);
    const double pt = 0.2 + 0.6 * rng.next_double();
    spec.p_t_given_zu = Matrix::Constant(2, 2, pt); // randomized assignment
    spec.p_y0_given_xu = table(2, 0.05, 0.95);
    spec.p_y1_given_xu = table(2, 0.05, 0.95);
    spec.feature_map = FeatureMap::one_hot;
    spec.validate();
    return spec;
}

} // namespace

TEST_CASE("first_moment_coeffs on identity arms subtracts the outcome moments") {
    Vector zy1(2), zy0(2);
    zy1 << 0.7, 0.2;
    zy0 << 0.1, 0.5;
    const SpoCoefficients c = first_moment_coeffs(identity_bundle(zy1, zy0));
    CHECK(c.order == 1);
    CHECK(c.alpha.isApprox(zy1, 1e-14));
    CHECK(c.beta.isApprox(zy0, 1e-14));
    CHECK(c.gamma.isApprox(Vector(zy1 - zy0), 1e-14));
}

TEST_CASE("gamma of the exact mu_zt=1 model annihilates the mean vector") {
    const MomentBundle b = exact_bundle(hierarchy_model(1.0, 0.0));
    const SpoCoefficients c = first_moment_coeffs(b);
    CHECK(c.gamma == c.alpha - c.beta);
    CHECK(b.m_x.dot(c.gamma) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("singular arm matrices are rejected loudly") {
    MomentBundle b = identity_bundle(Vector::Zero(2), Vector::Zero(2));
    b.m_zx_t[1] = Matrix::Ones(2, 2);
    CHECK_THROWS_AS(first_moment_coeffs(b), SingularMomentMatrix);

    MomentBundle rect = identity_bundle(Vector::Zero(2), Vector::Zero(2));
    rect.m_zx_t[0] = rect.m_zx_t[1] = Matrix::Ones(3, 2);
    CHECK_THROWS_AS(first_moment_coeffs(rect), DimensionMismatch);
}

TEST_CASE("next_moment_coeffs is zero on zero gamma and identity moments") {
    const MomentBundle b = identity_bundle(Vector::Zero(2), Vector::Zero(2));
    SpoCoefficients prev;
    prev.order = 1;
    prev.alpha = prev.beta = prev.gamma = Vector::Zero(2);
    CHECK(next_moment_coeffs(b, prev).gamma.isZero(0.0));

    prev.gamma = Vector::Ones(2);
    const SpoCoefficients next = next_moment_coeffs(b, prev);
    CHECK(next.order == 2);
    CHECK(next.gamma.isZero(0.0)); // alpha == beta when both arms identical
}

TEST_CASE("next_moment_coeffs is linear in the previous gamma") {
    const MomentBundle b = random_bundle(31);
    SpoCoefficients g1, g2;
    g1.order = g2.order = 1;
    Rng rng(55);
    g1.gamma = Vector::NullaryExpr(2, [&](Index) { return rng.next_double(); });
    g2.gamma = Vector::NullaryExpr(2, [&](Index) { return rng.next_double(); });
    g1.alpha = g1.beta = g2.alpha = g2.beta = Vector::Zero(2);

    const double c1 = -0.7, c2 = 2.3;
    SpoCoefficients combo = g1;
    combo.gamma = c1 * g1.gamma + c2 * g2.gamma;
    const Vector lhs = next_moment_coeffs(b, combo).gamma;
    const Vector rhs = c1 * next_moment_coeffs(b, g1).gamma + c2 * next_moment_coeffs(b, g2).gamma;
    CHECK(lhs.isApprox(rhs, 1e-9));
}

TEST_CASE("second response moment of the mu_zt=1 model is 9/16") {
    const MomentBundle b = exact_bundle(hierarchy_model(1.0, 0.0));
    const SpoCoefficients c1 = first_moment_coeffs(b);
    const SpoCoefficients c2 = next_moment_coeffs(b, c1);
    CHECK(b.m_x.dot(c2.gamma) == doctest::Approx(9.0 / 16.0).epsilon(1e-12));
}

TEST_CASE("exact ATE is zero across the identifiability family") {
    CHECK(ate(exact_bundle(hierarchy_model(1.0, 0.0))) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ate(exact_bundle(hierarchy_model(1.0, 1.0))) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("exact ATE of the four-covariate model is 1/4") {
    const MomentBundle b = exact_bundle(four_covariate_model());
    CHECK(ate(b) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("response moment sequences of the mu_xy=0 models coincide") {
    const MomentSequence sa = response_moment_sequence(exact_bundle(hierarchy_model(0.0, 0.0)), 2);
    const MomentSequence sb = response_moment_sequence(exact_bundle(hierarchy_model(1.0, 0.0)), 2);
    Vector expected(3);
    expected << 0.0, 9.0 / 16.0, 0.0;
    CHECK(sa.values.isApprox(expected, 1e-12));
    CHECK((sa.values - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sb.values - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("k=1 sequence is just the ATE") {
    const MomentBundle b = exact_bundle(four_covariate_model());
    const MomentSequence seq = response_moment_sequence(b, 1);
    REQUIRE(seq.values.size() == 1);
    CHECK(seq.values[0] == doctest::Approx(ate(b)).epsilon(1e-14));
}

TEST_CASE("pseudoinverse route reduces to the square solve") {
    for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
        const MomentBundle b = random_bundle(seed);
        CHECK(ate_via_pseudoinverse(b) == doctest::Approx(ate(b)).epsilon(1e-10));
    }
    CHECK(ate_via_pseudoinverse(exact_bundle(hierarchy_model(1.0, 1.0))) ==
          doctest::Approx(0.0).epsilon(1e-11));
}

TEST_CASE("pseudoinverse route handles a redundant third proxy") {
    // d_z = 3 > d_x = 2: an extra independent binary Z proxy.
    ModelSpec spec;
    spec.k = 2;
    spec.p_u = Vector::Constant(2, 0.5);
    spec.p_z_given_u.resize(3, 2);
    spec.p_z_given_u << 0.20, 0.50, 0.58, 0.28, 0.35, 0.65;
    spec.p_x_given_u.resize(2, 2);
    spec.p_x_given_u << 0.36, 0.66, 0.74, 0.44;
    spec.p_t_given_zu = Matrix::Zero(8, 2);
    for (int z = 0; z < 8; ++z) {
        spec.p_t_given_zu(z, 0) = 0.75;
        spec.p_t_given_zu(z, 1) = 0.25;
    }
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

    const GroundTruth truth = exact_ground_truth(spec);
    const MomentBundle b = exact_bundle(spec);
    REQUIRE(b.d_z() == 3);
    REQUIRE(b.d_x() == 2);
    CHECK(ate_via_pseudoinverse(b) == doctest::Approx(truth.ate).epsilon(1e-8));
    CHECK_THROWS_AS(ate(b), DimensionMismatch);
}

TEST_CASE("coefficients are invariant to Z reparameterization") {
    Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        const MomentBundle b = exact_bundle(
            hierarchy_model(0.1 * trial, 1.0 - 0.1 * trial));
        Matrix a(2, 2);
        for (Index i = 0; i < 2; ++i) {
            for (Index j = 0; j < 2; ++j) a(i, j) = 0.4 * (rng.next_double() - 0.5);
        }
        a += Matrix::Identity(2, 2);
        const MomentBundle rb = reparameterize_z(b, a);

        SpoCoefficients c = first_moment_coeffs(b);
        SpoCoefficients rc = first_moment_coeffs(rb);
        for (int order = 1; order <= 5; ++order) {
            CHECK(rc.gamma.isApprox(c.gamma, 1e-9));
            c = next_moment_coeffs(b, c);
            rc = next_moment_coeffs(rb, rc);
        }
    }
}

TEST_CASE("randomized treatment makes the ATE a conditional-mean difference") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const ModelSpec spec = random_constant_treatment_spec(1000 + seed);
        const GroundTruth truth = exact_ground_truth(spec);
        const MomentBundle b = exact_bundle(spec);

        // E[Y|T=t] straight off the joint table.
        double ey[2] = {0.0, 0.0};
        double pt[2] = {0.0, 0.0};
        for (int u = 0; u < spec.k; ++u) {
            for (int z = 0; z < spec.z_configs(); ++z) {
                for (int x = 0; x < spec.x_configs(); ++x) {
                    for (int t = 0; t < 2; ++t) {
                        for (int y = 0; y < 2; ++y) {
                            pt[t] += truth.joint.at(u, z, x, t, y);
                            ey[t] += y * truth.joint.at(u, z, x, t, y);
                        }
                    }
                }
            }
        }
        const double naive = ey[1] / pt[1] - ey[0] / pt[0];
        CHECK(ate(b) == doctest::Approx(naive).epsilon(1e-10));
        CHECK(ate(b) == doctest::Approx(truth.ate).epsilon(1e-10));
    }
}
