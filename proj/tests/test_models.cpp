#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <gfd/models.hpp>
#include <gfd/math.hpp>

#include "support/oracles.hpp"

using namespace gfd;

namespace {

ModelSpec loc_normal() { return ModelSpec::from_id("location-normal"); }
ModelSpec scaled_normal(double q) { return ModelSpec::from_id("scaled-normal", q); }
ModelSpec bivnorm() { return ModelSpec::from_id("bivnorm-rho"); }

Sample random_sample(const ModelSpec& model, double theta, int n, std::uint64_t seed) {
    Stream st(seed, 0, 0);
    return sample_data(model, theta, n, st);
}

} // namespace

TEST_CASE("log-likelihood point values") {
    CHECK(log_likelihood(loc_normal(), Sample::scalar({0.0}), 0.0) ==
          doctest::Approx(-0.9189385332046727).epsilon(1e-12));
    CHECK(log_likelihood(bivnorm(), Sample::pairs({0.0}, {0.0}), 0.0) ==
          doctest::Approx(-1.8378770664093453).epsilon(1e-12));
    // N(1, 1) with both observations at the mode
    CHECK(log_likelihood(scaled_normal(1.0), Sample::scalar({1.0, 1.0}), 1.0) ==
          doctest::Approx(-0.9189385332046727).epsilon(1e-12));
}

TEST_CASE("log-likelihood rejects bad input") {
    CHECK_THROWS_AS(log_likelihood(scaled_normal(1.0), Sample::scalar({1.0}), -2.0),
                    DomainError);
    CHECK_THROWS_AS(log_likelihood(bivnorm(), Sample::pairs({0.0}, {0.0}), 1.0), DomainError);
    CHECK_THROWS_AS(Sample::scalar({1.0, kNaN}), InputError);
    CHECK_THROWS_AS(log_likelihood(loc_normal(), Sample::pairs({0.0}, {0.0}), 0.0),
                    InputError);
}

TEST_CASE("log-likelihood derivative point values") {
    CHECK(log_likelihood_deriv(loc_normal(), Sample::scalar({0.4, -1.2, 3.0}), 0.7, 3) == 0.0);
    CHECK(log_likelihood_deriv(loc_normal(), Sample::scalar({0.0, 2.0}), 0.0, 1) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("scaled-normal score vanishes at the grid-search MLE") {
    const auto model = scaled_normal(1.0);
    const auto sample = random_sample(model, 2.0, 40, 123);
    auto L = [&](double mu) { return log_likelihood(model, sample, mu); };
    // coarse grid then two zooms, net resolution 1e-6 over (1e-3, 20)
    double lo = 1e-3, hi = 20.0, step = 1e-2;
    double best = 0;
    for (int zoom = 0; zoom < 3; ++zoom) {
        best = oracles::grid_argmax(L, lo, hi, step);
        lo = std::max(1e-3, best - 2 * step);
        hi = std::min(20.0, best + 2 * step);
        step *= 1e-2;
    }
    const auto fit = mle(model, sample);
    CHECK(std::abs(fit.theta_hat - best) < 1e-5);
    CHECK(std::abs(log_likelihood_deriv(model, sample, fit.theta_hat, 1)) < 1e-8);
}

TEST_CASE("bivnorm MLE matches the grid oracle") {
    const auto model = bivnorm();
    const auto sample = random_sample(model, 0.6, 25, 77);
    auto L = [&](double r) { return log_likelihood(model, sample, r); };
    double lo = -0.999, hi = 0.999, step = 1e-3;
    double best = 0;
    for (int zoom = 0; zoom < 2; ++zoom) {
        best = oracles::grid_argmax(L, lo, hi, step);
        lo = std::max(-0.999, best - 2 * step);
        hi = std::min(0.999, best + 2 * step);
        step *= 1e-3;
    }
    const auto fit = mle(model, sample);
    CHECK(fit.converged);
    CHECK(std::abs(fit.theta_hat - best) < 1e-5);
    CHECK(fit.c > 0.0);
}

TEST_CASE("MLE dominates 1000 random interior parameters") {
    struct Case {
        ModelSpec model;
        double theta0;
        double lo, hi;
    };
    const Case cases[] = {
        {loc_normal(), 0.5, -4.0, 4.0},
        {ModelSpec::from_id("scale-exponential"), 1.5, 0.01, 20.0},
        {ModelSpec::from_id("gamma-shape"), 2.0, 0.05, 20.0},
        {scaled_normal(1.0), 2.0, 0.01, 20.0},
        {bivnorm(), 0.4, -0.999, 0.999},
    };
    for (const auto& c : cases) {
        const auto sample = random_sample(c.model, c.theta0, 30, 2024);
        const auto fit = mle(c.model, sample);
        const double lmax = log_likelihood(c.model, sample, fit.theta_hat);
        Stream st(5, 0, 0);
        for (int i = 0; i < 1000; ++i) {
            const double t = c.lo + (c.hi - c.lo) * st.uniform01();
            CHECK(log_likelihood(c.model, sample, t) <= lmax + 1e-12);
        }
    }
}

TEST_CASE("MLE curvature quantities match the derivative operator") {
    const auto model = scaled_normal(1.5);
    const auto sample = random_sample(model, 1.2, 20, 9);
    const auto fit = mle(model, sample);
    CHECK(fit.c == doctest::Approx(-log_likelihood_deriv(model, sample, fit.theta_hat, 2)));
    CHECK(fit.l3 == doctest::Approx(log_likelihood_deriv(model, sample, fit.theta_hat, 3)));
    CHECK(fit.l4 == doctest::Approx(log_likelihood_deriv(model, sample, fit.theta_hat, 4)));
}

TEST_CASE("analytic likelihood derivatives agree with finite differences") {
    struct Case {
        ModelSpec model;
        double theta0;
    };
    const Case cases[] = {
        {loc_normal(), 0.0},
        {ModelSpec::from_id("scale-exponential"), 2.0},
        {ModelSpec::from_id("gamma-shape"), 2.5},
        {scaled_normal(1.0), 2.0},
        {scaled_normal(2.7), 1.3},
        {bivnorm(), 0.3},
    };
    Stream st(42, 0, 0);
    for (const auto& c : cases) {
        for (int rep = 0; rep < 20; ++rep) {
            Stream draw(100 + rep, rep, 0);
            const auto sample = sample_data(c.model, c.theta0, 12, draw);
            const auto dom = c.model.domain();
            double theta = c.theta0 * (0.75 + 0.5 * st.uniform01());
            if (c.model.family == Family::BivNormRho)
                theta = -0.8 + 1.6 * st.uniform01();
            if (!dom.contains(theta)) theta = c.theta0;
            auto L = [&](double t) { return log_likelihood(c.model, sample, t); };
            auto L1 = [&](double t) { return log_likelihood_deriv(c.model, sample, t, 1); };
            const double h = fd_step(theta);
            const double fd1 = oracles::central_d1(L, theta, h);
            // order 2 by differencing the order-1 derivative once it is validated;
            // second differences of L itself sit at the roundoff floor at this step
            const double fd2 = oracles::central_d1(L1, theta, h);
            const double an1 = log_likelihood_deriv(c.model, sample, theta, 1);
            const double an2 = log_likelihood_deriv(c.model, sample, theta, 2);
            CHECK(std::abs(fd1 - an1) <= 1e-5 * std::max(1.0, std::abs(an1)));
            CHECK(std::abs(fd2 - an2) <= 1e-5 * std::max(1.0, std::abs(an2)));
        }
    }
}

TEST_CASE("Fisher information point values and derivative consistency") {
    CHECK(fisher_info(loc_normal(), 3.7, 0) == 1.0);
    CHECK(fisher_info(bivnorm(), 0.0, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fisher_info(scaled_normal(1.0), 1.0, 0) == doctest::Approx(1.5).epsilon(1e-14));

    // paper identity (1/2) I'/I = (3 rho + rho^3) / ((1 - rho^2)(1 + rho^2))
    for (double r : {-0.75, -0.3, 0.2, 0.5, 0.9}) {
        const double lhs = 0.5 * fisher_info(bivnorm(), r, 1) / fisher_info(bivnorm(), r, 0);
        const double rhs = (3.0 * r + r * r * r) / ((1.0 - r * r) * (1.0 + r * r));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }

    const ModelSpec models[] = {loc_normal(), ModelSpec::from_id("scale-exponential"),
                                ModelSpec::from_id("gamma-shape"), scaled_normal(1.0),
                                scaled_normal(2.5), bivnorm()};
    for (const auto& m : models) {
        const double thetas[] = {m.family == Family::BivNormRho ? 0.4 : 1.7,
                                 m.family == Family::BivNormRho ? -0.6 : 0.6};
        for (double t : thetas) {
            auto I0 = [&](double x) { return fisher_info(m, x, 0); };
            auto I1 = [&](double x) { return fisher_info(m, x, 1); };
            const double h = 0.5 * fd_step(t);
            CHECK(std::abs(richardson_d1(I0, t, h) - fisher_info(m, t, 1)) <=
                  1e-6 * std::max(1.0, std::abs(fisher_info(m, t, 1))));
            CHECK(std::abs(richardson_d1(I1, t, h) - fisher_info(m, t, 2)) <=
                  1e-6 * std::max(1.0, std::abs(fisher_info(m, t, 2))));
        }
    }
}

TEST_CASE("m3 vanishes identically for the location-normal family") {
    for (double t : {-5.0, -1.0, 0.0, 0.3, 2.0, 40.0}) CHECK(m3(loc_normal(), t) == 0.0);
}

TEST_CASE("m3 matches a 1e7-draw Monte Carlo mean of the analytic third derivative") {
    const auto sn = scaled_normal(1.0);
    auto g_sn = [&](const Sample& s) { return log_likelihood_deriv(sn, s, 1.0, 3); };
    const auto est_sn = oracles::mc_mean(sn, 1.0, 10'000'000, 31337, g_sn);
    CHECK(std::abs(m3(sn, 1.0) - est_sn.mean) <= 3.0 * est_sn.se);

    const auto bn = bivnorm();
    auto g_bn = [&](const Sample& s) { return log_likelihood_deriv(bn, s, 0.5, 3); };
    const auto est_bn = oracles::mc_mean(bn, 0.5, 10'000'000, 998, g_bn);
    CHECK(std::abs(m3(bn, 0.5) - est_bn.mean) <= 3.0 * est_bn.se);
}

TEST_CASE("m3 agrees with the Gauss-Hermite quadrature path") {
    CHECK(m3_gauss_hermite(loc_normal(), 0.7) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(m3_gauss_hermite(scaled_normal(1.0), 2.0) ==
          doctest::Approx(m3(scaled_normal(1.0), 2.0)).epsilon(1e-8));
    CHECK(m3_gauss_hermite(bivnorm(), 0.5, 64) ==
          doctest::Approx(m3(bivnorm(), 0.5)).epsilon(1e-8));
}

TEST_CASE("m3_deriv agrees with finite differences of m3") {
    const ModelSpec models[] = {ModelSpec::from_id("scale-exponential"),
                                ModelSpec::from_id("gamma-shape"), scaled_normal(1.0),
                                bivnorm()};
    for (const auto& m : models) {
        const double t = m.family == Family::BivNormRho ? 0.35 : 1.4;
        auto f = [&](double x) { return m3(m, x); };
        CHECK(std::abs(richardson_d1(f, t, fd_step(t)) - m3_deriv(m, t)) <=
              1e-6 * std::max(1.0, std::abs(m3_deriv(m, t))));
    }
}

TEST_CASE("sampling is deterministic and matches moment bounds") {
    const auto model = scaled_normal(1.0);
    Stream a(99, 4, 0), b(99, 4, 0);
    const auto s1 = sample_data(model, 3.0, 1000, a);
    const auto s2 = sample_data(model, 3.0, 1000, b);
    CHECK(s1.x() == s2.x());

    Stream big(7, 0, 0);
    const auto s3 = sample_data(model, 3.0, 1'000'000, big);
    CHECK(std::abs(s3.mean() - 3.0) <= 4.0 * std::sqrt(3.0 / 1e6));

    Stream bn_stream(8, 0, 0);
    const auto s4 = sample_data(bivnorm(), 0.9, 1'000'000, bn_stream);
    CHECK(std::abs(s4.mean_cross() - 0.9) <= 4.0 * std::sqrt((1.0 + 0.81) / 1e6));
}

TEST_CASE("gamma and exponential samplers hit their known moments") {
    Stream g(5150, 0, 0);
    const auto gs = sample_data(ModelSpec::from_id("gamma-shape"), 2.0, 400'000, g);
    CHECK(std::abs(gs.mean() - 2.0) <= 4.0 * std::sqrt(2.0 / 400'000.0));
    Stream e(515, 0, 0);
    const auto es = sample_data(ModelSpec::from_id("scale-exponential"), 1.5, 400'000, e);
    CHECK(std::abs(es.mean() - 1.5) <= 4.0 * 1.5 / std::sqrt(400'000.0));
}

TEST_CASE("uniform-location support box and non-regular guards") {
    const auto model = ModelSpec::from_id("uniform-location");
    const auto s = Sample::scalar({1.2, 1.5, 1.9});
    const auto box = theta_support(model, s);
    REQUIRE(box.has_value());
    CHECK(box->lower == doctest::Approx(0.9));
    CHECK(box->upper == doctest::Approx(1.2));
    CHECK(log_likelihood(model, s, 1.0) == 0.0);
    CHECK(log_likelihood(model, s, 0.5) == -kInf);
    CHECK_THROWS_AS(fisher_info(model, 1.0, 0), UnsupportedError);
    CHECK_THROWS_AS(m3(model, 1.0), UnsupportedError);
    CHECK_THROWS_AS(theta_support(model, Sample::scalar({0.0, 1.7})), DegenerateSampleError);
}

TEST_CASE("mle requires at least two observations") {
    CHECK_THROWS_AS(mle(loc_normal(), Sample::scalar({1.0})), InputError);
}
