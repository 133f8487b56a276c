#include "spomix/synthetic.hpp"

#include "spomix/errors.hpp"
#include "spomix/moments.hpp"

#include <doctest.h>

#include <cmath>

using namespace spomix;

TEST_CASE("treatment table orientation across the mu_zt range") {
    const ModelSpec b = hierarchy_model(1.0, 0.0);
    // T depends on Z only: rows constant across U.
    CHECK(b.p_t_given_zu(0, 0) == doctest::Approx(0.75));
    CHECK(b.p_t_given_zu(0, 1) == doctest::Approx(0.75));
    CHECK(b.p_t_given_zu(1, 0) == doctest::Approx(0.25));
    CHECK(b.p_t_given_zu(1, 1) == doctest::Approx(0.25));

    const ModelSpec a = hierarchy_model(0.0, 0.0);
    // T depends on U only: columns constant across Z.
    CHECK(a.p_t_given_zu(0, 0) == doctest::Approx(0.75));
    CHECK(a.p_t_given_zu(1, 0) == doctest::Approx(0.75));
    CHECK(a.p_t_given_zu(0, 1) == doctest::Approx(0.25));
    CHECK(a.p_t_given_zu(1, 1) == doctest::Approx(0.25));
}

TEST_CASE("outcome tables depend only on X at mu_xy=1") {
    const ModelSpec c = hierarchy_model(1.0, 1.0);
    for (int x = 0; x < 2; ++x) {
        CHECK(c.p_y0_given_xu(x, 0) == doctest::Approx(c.p_y0_given_xu(x, 1)));
        CHECK(c.p_y1_given_xu(x, 0) == doctest::Approx(c.p_y1_given_xu(x, 1)));
    }
    CHECK(c.p_y0_given_xu(0, 0) == doctest::Approx(7.0 / 8.0));
    CHECK(c.p_y1_given_xu(1, 0) == doctest::Approx(7.0 / 8.0));
}

TEST_CASE("parameters outside the unit interval are rejected") {
    CHECK_THROWS_AS(hierarchy_model(-0.1, 0.0), OutOfRange);
    CHECK_THROWS_AS(hierarchy_model(0.0, 1.5), OutOfRange);
    CHECK_THROWS_AS(hierarchy_model(std::nan(""), 0.0), OutOfRange);
}

TEST_CASE("four-covariate model tables") {
    const ModelSpec m = four_covariate_model();
    CHECK(m.p_z_given_u(0, 1) == doctest::Approx(0.5));   // P(Z1=1|U=1)
    CHECK(m.p_t_given_zu(0, 0) == doctest::Approx(0.75)); // P(T=1|U=0)
    CHECK(m.p_t_given_zu(3, 1) == doctest::Approx(0.25));
    CHECK(m.d_z() == 2);
    CHECK(m.d_x() == 2);

    const GroundTruth truth = exact_ground_truth(m);
    CHECK(truth.ate == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(truth.mte.effects[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(truth.mte.effects[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(truth.mte.weights.isApprox(Vector::Constant(2, 0.5), 1e-14));
}

TEST_CASE("sampling is deterministic in (spec, n, seed)") {
    const ModelSpec spec = hierarchy_model(0.4, 0.9);
    const Dataset a = sample(spec, 512, 123456);
    const Dataset b = sample(spec, 512, 123456);
    CHECK(a.z == b.z);
    CHECK(a.x == b.x);
    CHECK(a.t == b.t);
    CHECK(a.y == b.y);
    CHECK(*a.u == *b.u);

    const Dataset c = sample(spec, 512, 123457);
    CHECK(c.t != a.t); // different stream
}

TEST_CASE("sampled frequencies concentrate on the table values") {
    const Dataset d = sample(hierarchy_model(1.0, 0.0), 1000000, 99);
    // P(T=1 | Z=0) = 3/4 under mu_zt = 1; feature z1 = 1{Z=0}.
    std::int64_t z0 = 0, z0t1 = 0, u1 = 0;
    for (Index i = 0; i < d.n(); ++i) {
        if (d.z(i, 0) == 1.0) {
            ++z0;
            z0t1 += d.t[i];
        }
        u1 += (*d.u)[i];
    }
    CHECK(std::abs(static_cast<double>(z0t1) / z0 - 0.75) < 0.005);
    CHECK(std::abs(static_cast<double>(u1) / d.n() - 0.5) < 0.005);
}

TEST_CASE("ground-truth effects are constant in mu_zt at mu_xy=0") {
    for (int i = 0; i <= 10; ++i) {
        const GroundTruth truth = exact_ground_truth(hierarchy_model(0.1 * i, 0.0));
        CHECK(truth.mte.effects[0] == doctest::Approx(-0.75).epsilon(1e-14));
        CHECK(truth.mte.effects[1] == doctest::Approx(0.75).epsilon(1e-14));
        CHECK(truth.ate == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("ground truth at (1,1) shrinks the class effects to +-3/8") {
    const GroundTruth truth = exact_ground_truth(hierarchy_model(1.0, 1.0));
    CHECK(truth.mte.effects[0] == doctest::Approx(-0.375).epsilon(1e-14));
    CHECK(truth.mte.effects[1] == doctest::Approx(0.375).epsilon(1e-14));
    CHECK(truth.ate == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("joint table is a probability distribution across the parameter grid") {
    for (int i = 0; i <= 20; ++i) {
        const double zt = i / 20.0;
        const double xy = 1.0 - i / 20.0;
        const GroundTruth truth = exact_ground_truth(hierarchy_model(zt, xy));
        CHECK(std::abs(truth.joint.total() - 1.0) < 1e-12);
        double neg = 0.0;
        for (double p : truth.joint.p) neg = std::min(neg, p);
        CHECK(neg >= 0.0);
    }
}

TEST_CASE("marginalizing the unused potential outcome reproduces the joint") {
    const GroundTruth truth = exact_ground_truth(hierarchy_model(0.7, 0.3));
    for (int u = 0; u < 2; ++u) {
        for (int z = 0; z < 2; ++z) {
            for (int x = 0; x < 2; ++x) {
                // t=1 reveals y1, marginalize y0 and vice versa
                for (int y = 0; y < 2; ++y) {
                    const double m1 =
                        truth.potential_at(u, z, x, 1, 0, y) + truth.potential_at(u, z, x, 1, 1, y);
                    CHECK(m1 == doctest::Approx(truth.joint.at(u, z, x, 1, y)).epsilon(1e-14));
                    const double m0 =
                        truth.potential_at(u, z, x, 0, y, 0) + truth.potential_at(u, z, x, 0, y, 1);
                    CHECK(m0 == doctest::Approx(truth.joint.at(u, z, x, 0, y)).epsilon(1e-14));
                }
            }
        }
    }
}

TEST_CASE("exact bundle equals the sampling limit") {
    for (auto [zt, xy] : {std::pair{0.0, 0.0}, std::pair{1.0, 0.0}, std::pair{1.0, 1.0}}) {
        const ModelSpec spec = hierarchy_model(zt, xy);
        const MomentBundle exact = exact_bundle(spec);
        const MomentBundle est = estimate_bundle(sample(spec, 100000, 4242));
        double worst = (est.m_x - exact.m_x).cwiseAbs().maxCoeff();
        for (int t = 0; t < 2; ++t) {
            worst = std::max(worst, (est.m_zx_t[t] - exact.m_zx_t[t]).cwiseAbs().maxCoeff());
            worst = std::max(worst, (est.m_zy_t[t] - exact.m_zy_t[t]).cwiseAbs().maxCoeff());
            worst = std::max(worst, (est.m_zxy_t[t] - exact.m_zxy_t[t]).cwiseAbs().maxCoeff());
        }
        CHECK(worst < 0.02);
    }
}
