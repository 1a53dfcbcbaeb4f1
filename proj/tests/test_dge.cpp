#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include <gfd/dge.hpp>
#include <gfd/math.hpp>

#include "support/oracles.hpp"

using namespace gfd;

namespace {

const ModelSpec kLoc = ModelSpec::from_id("location-normal");
const ModelSpec kScale = ModelSpec::from_id("scale-exponential");
const ModelSpec kGamma = ModelSpec::from_id("gamma-shape");
const ModelSpec kBiv = ModelSpec::from_id("bivnorm-rho");

ModelSpec scaled(double q) { return ModelSpec::from_id("scaled-normal", q); }

Sample draw(const ModelSpec& m, double theta0, int n, std::uint64_t seed) {
    Stream st(seed, 0, 0);
    return sample_data(m, theta0, n, st);
}

} // namespace

TEST_CASE("DGE id round trips and method aliases") {
    for (const char* id : {"simple", "suffstat", "matched", "jeffreys", "invcdf:invx"})
        CHECK(DgeSpec::from_id(id).id() == id);
    CHECK(DgeSpec::from_method("FS").id() == "simple");
    CHECK(DgeSpec::from_method("F1").id() == "matched");
    CHECK(DgeSpec::from_method("BJ").id() == "jeffreys");
    CHECK(DgeSpec::from_method("suffstat").id() == "suffstat");
    CHECK_THROWS_AS(DgeSpec::from_id("nosuch"), InputError);
    CHECK_THROWS_AS(DgeSpec::from_id("invcdf:nosuch"), InputError);
    CHECK(!DgeSpec::from_id("invcdf:invx").analytic_limit());
    CHECK(DgeSpec::from_id("matched").analytic_limit());
}

TEST_CASE("jacobian point values") {
    // single observation at the mean: |1 + 0| = 1
    const double mu = 2.0;
    CHECK(jacobian(scaled(1.0), DgeSpec::from_id("simple"), Sample::scalar({mu}), mu) ==
          doctest::Approx(1.0).epsilon(1e-14));
    // scale family Jacobian pinned to 1/theta
    CHECK(jacobian(kScale, DgeSpec::from_id("simple"), Sample::scalar({0.3, 5.0}), 2.0) ==
          doctest::Approx(0.5).epsilon(1e-14));
    // suffstat with V1 = V2 = 1 at rho = 0: 1/(1+0) + 1/(1-0) = 2
    const double t = kSqrt2;
    const auto pairs = Sample::pairs({t, 0.0}, {0.0, t});
    CHECK(pairs.v1() == doctest::Approx(1.0));
    CHECK(pairs.v2() == doctest::Approx(1.0));
    CHECK(jacobian(kBiv, DgeSpec::from_id("suffstat"), pairs, 0.0) ==
          doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("jacobian rejects invalid pairs and degenerate samples") {
    CHECK_THROWS_AS(jacobian(kLoc, DgeSpec::from_id("matched"), Sample::scalar({1.0}), 0.0),
                    InputError);
    // matched scaled-normal requires a positive sample mean
    const auto bad = Sample::scalar({-3.0, 1.0});
    CHECK(degenerate_for(scaled(1.0), DgeSpec::from_id("matched"), bad));
    CHECK_THROWS_AS(jacobian(scaled(1.0), DgeSpec::from_id("matched"), bad, 1.0),
                    DegenerateSampleError);
}

TEST_CASE("jacobian positivity on random draws") {
    struct Combo {
        ModelSpec model;
        const char* dge;
        double theta0;
    };
    const Combo combos[] = {
        {kLoc, "simple", 0.0},          {kScale, "simple", 1.0},
        {kGamma, "invcdf:invx", 2.0},   {scaled(1.0), "simple", 2.0},
        {scaled(1.0), "suffstat", 2.0}, {scaled(1.0), "matched", 2.0},
        {kBiv, "simple", 0.5},          {kBiv, "suffstat", 0.5},
        {kBiv, "matched", 0.5},         {kBiv, "jeffreys", 0.5},
    };
    for (const auto& c : combos) {
        const auto dge = DgeSpec::from_id(c.dge);
        Stream st(2718, 0, 0);
        int checked = 0;
        for (int i = 0; i < 1000; ++i) {
            Stream ds(3000 + i, 0, 0);
            const auto s = sample_data(c.model, c.theta0, 8, ds);
            if (degenerate_for(c.model, dge, s)) continue;
            const double theta = c.model.family == Family::BivNormRho
                                     ? -0.95 + 1.9 * st.uniform01()
                                     : 0.05 + 5.0 * st.uniform01();
            CHECK(jacobian(c.model, dge, s, theta) > 0.0);
            ++checked;
        }
        CHECK(checked > 900);
    }
}

TEST_CASE("jacobian derivative point values") {
    CHECK(jacobian_deriv(kLoc, DgeSpec::from_id("simple"), Sample::scalar({0.1, 0.7}), 0.4, 1) ==
          0.0);
    CHECK(jacobian_deriv(kScale, DgeSpec::from_id("simple"), Sample::scalar({1.0, 2.0}), 2.0, 1) ==
          doctest::Approx(-0.25).epsilon(1e-14));
}

TEST_CASE("analytic jacobian derivatives match finite differences") {
    struct Combo {
        ModelSpec model;
        const char* dge;
        double theta0, theta;
    };
    const Combo combos[] = {
        {kBiv, "matched", 0.5, 0.4},         {kBiv, "suffstat", 0.5, 0.2},
        {kBiv, "simple", 0.3, 0.35},         {scaled(1.0), "simple", 2.0, 1.7},
        {scaled(1.0), "suffstat", 2.0, 2.4}, {scaled(1.0), "matched", 2.0, 2.1},
        {scaled(1.0), "jeffreys", 2.0, 1.1},
    };
    for (const auto& c : combos) {
        const auto dge = DgeSpec::from_id(c.dge);
        const auto s = draw(c.model, c.theta0, 15, 41);
        auto J = [&](double t) { return jacobian(c.model, dge, s, t); };
        const double fd1 = oracles::central_d1(J, c.theta, fd_step(c.theta));
        const double an1 = jacobian_deriv(c.model, dge, s, c.theta, 1);
        CHECK(std::abs(fd1 - an1) <= 1e-6 * std::max(1.0, std::abs(an1)));
        auto J1 = [&](double t) { return jacobian_deriv(c.model, dge, s, t, 1); };
        const double fd2 = oracles::central_d1(J1, c.theta, fd_step(c.theta));
        const double an2 = jacobian_deriv(c.model, dge, s, c.theta, 2);
        CHECK(std::abs(fd2 - an2) <= 1e-6 * std::max(1.0, std::abs(an2)));
    }

    // gamma inverse-cdf: the sampled Jacobian itself carries ~1e-9 relative
    // noise from its internal dF/dtheta differences, so the difference oracle
    // is looser here
    const auto gdge = DgeSpec::from_id("invcdf:invx");
    const auto gs = draw(kGamma, 2.0, 15, 41);
    auto gJ = [&](double t) { return jacobian(kGamma, gdge, gs, t); };
    const double gfd1 = oracles::central_d1(gJ, 2.3, 1e-4 * 2.3);
    const double gan1 = jacobian_deriv(kGamma, gdge, gs, 2.3, 1);
    CHECK(std::abs(gfd1 - gan1) <= 1e-4 * std::max(1.0, std::abs(gan1)));
    auto gJ1 = [&](double t) { return jacobian_deriv(kGamma, gdge, gs, t, 1); };
    const double gfd2 = oracles::central_d1(gJ1, 2.3, fd_step(2.3));
    const double gan2 = jacobian_deriv(kGamma, gdge, gs, 2.3, 2);
    CHECK(std::abs(gfd2 - gan2) <= 1e-5 * std::max(1.0, std::abs(gan2)));
}

TEST_CASE("derivative at a kink raises KinkError naming the breakpoint") {
    // q = 1, observation x: kink at mu = q x / (q - 2) = -x; choose x < 0
    const auto model = scaled(1.0);
    const auto s = Sample::scalar({-3.0, 1.0});
    const auto kinks = kink_points(model, DgeSpec::from_id("simple"), s, {0.1, 10.0});
    REQUIRE(kinks.points.size() == 1);
    CHECK(kinks.points[0] == doctest::Approx(3.0));
    try {
        jacobian_deriv(model, DgeSpec::from_id("simple"), s, 3.0, 1);
        FAIL("expected KinkError");
    } catch (const KinkError& e) {
        CHECK(e.kink == doctest::Approx(3.0));
    }
}

TEST_CASE("kink sets") {
    // q = 2: t = x / mu never vanishes for x != 0
    CHECK(kink_points(scaled(2.0), DgeSpec::from_id("simple"), Sample::scalar({1.5}),
                      {0.01, 50.0})
              .points.empty());
    // q = 1, x = 3: root mu = -3 lies outside (0, 10)
    CHECK(kink_points(scaled(1.0), DgeSpec::from_id("simple"), Sample::scalar({3.0}),
                      {0.0, 10.0})
              .points.empty());
    // bivnorm observation (1, 0.5): x/y = 2 excluded, y/x = 0.5 kept
    const auto ks = kink_points(kBiv, DgeSpec::from_id("simple"), Sample::pairs({1.0}, {0.5}),
                                {-1.0, 1.0});
    REQUIRE(ks.points.size() == 1);
    CHECK(ks.points[0] == doctest::Approx(0.5));
}

TEST_CASE("weighted inverse-cdf jacobian") {
    const auto gamma_sample = draw(kGamma, 2.0, 6, 5);
    auto invx = [](double x) { return 1.0 / x; };
    for (double theta : {0.5, 1.0, 2.0, 4.0})
        CHECK(weighted_invcdf_jacobian(kGamma, invx, gamma_sample, theta) > 0.0);

    // location-normal with w == 1: dF/dtheta = -f, so the sum is n
    const auto ln_sample = draw(kLoc, 0.0, 7, 6);
    auto one = [](double) { return 1.0; };
    CHECK(weighted_invcdf_jacobian(kLoc, one, ln_sample, 0.3) ==
          doctest::Approx(7.0).epsilon(1e-14));

    // linearity in w: doubling the weight doubles the output exactly
    auto w2 = [](double x) { return 2.0 / x; };
    CHECK(weighted_invcdf_jacobian(kGamma, w2, gamma_sample, 1.7) ==
          doctest::Approx(2.0 * weighted_invcdf_jacobian(kGamma, invx, gamma_sample, 1.7))
              .epsilon(1e-14));
}

TEST_CASE("limit jacobian point values") {
    for (double r0 : {-0.9, -0.4, 0.0, 0.3, 0.8})
        CHECK(limit_jacobian(kBiv, DgeSpec::from_id("suffstat"), r0, r0, 0) ==
              doctest::Approx(2.0).epsilon(1e-14));
    for (double t0 : {-2.0, 0.0, 1.5})
        for (double t : {-1.0, 0.5, 2.0})
            CHECK(limit_jacobian(kLoc, DgeSpec::from_id("simple"), t0, t, 0) == 1.0);
    // d/drho log J for the suffstat limit at rho0: rho0 / (1 - rho0^2)
    const double r0 = 0.5;
    const double dlog = limit_jacobian(kBiv, DgeSpec::from_id("suffstat"), r0, r0, 1) /
                        limit_jacobian(kBiv, DgeSpec::from_id("suffstat"), r0, r0, 0);
    CHECK(dlog == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("limit jacobian derivatives agree with finite differences of order 0") {
    struct Combo {
        ModelSpec model;
        const char* dge;
        double theta0, theta;
    };
    const Combo combos[] = {
        {kBiv, "simple", 0.5, 0.45},        {kBiv, "suffstat", 0.5, 0.6},
        {kBiv, "matched", 0.5, 0.3},        {kBiv, "jeffreys", 0.5, 0.5},
        {scaled(1.0), "simple", 2.0, 2.2},  {scaled(1.0), "suffstat", 2.0, 1.8},
        {scaled(1.0), "matched", 2.0, 2.0}, {scaled(2.5), "matched", 1.5, 1.4},
        {kScale, "simple", 1.0, 1.3},
    };
    for (const auto& c : combos) {
        const auto dge = DgeSpec::from_id(c.dge);
        auto J0 = [&](double t) { return limit_jacobian(c.model, dge, c.theta0, t, 0); };
        auto J1 = [&](double t) { return limit_jacobian(c.model, dge, c.theta0, t, 1); };
        const double an1 = limit_jacobian(c.model, dge, c.theta0, c.theta, 1);
        const double an2 = limit_jacobian(c.model, dge, c.theta0, c.theta, 2);
        const double fd1 = richardson_d1(J0, c.theta, fd_step(c.theta));
        const double fd2 = richardson_d1(J1, c.theta, fd_step(c.theta));
        CHECK(std::abs(fd1 - an1) <= 1e-7 * std::max(1.0, std::abs(an1)));
        CHECK(std::abs(fd2 - an2) <= 1e-7 * std::max(1.0, std::abs(an2)));
    }
}

TEST_CASE("scaled Jacobians converge to the limit as n grows") {
    struct Combo {
        ModelSpec model;
        const char* dge;
        double theta0;
    };
    const Combo combos[] = {
        {scaled(1.0), "simple", 2.0},  {scaled(1.0), "suffstat", 2.0},
        {scaled(1.0), "matched", 2.0}, {kBiv, "simple", 0.5},
        {kBiv, "suffstat", 0.5},       {kBiv, "matched", 0.5},
        {kGamma, "invcdf:invx", 2.0},
    };
    // nested prefixes of one long draw: the same random sequence refined
    for (const auto& c : combos) {
        const auto dge = DgeSpec::from_id(c.dge);
        const auto full = draw(c.model, c.theta0, 10000, 314159);
        const double half = c.model.family == Family::BivNormRho ? 0.1 : 0.3;
        for (int k = 0; k < 5; ++k) {
            const double theta = c.theta0 - half + 2.0 * half * k / 4.0;
            double prev = kInf;
            for (int n : {100, 1000, 10000}) {
                std::vector<double> xs(full.x().begin(), full.x().begin() + n);
                const auto s = c.model.bivariate()
                                   ? Sample::pairs(std::move(xs),
                                                   {full.y().begin(), full.y().begin() + n})
                                   : Sample::scalar(std::move(xs));
                const double scaledJ =
                    jacobian(c.model, dge, s, theta) * jacobian_limit_scaling(c.model, dge, n);
                const double err =
                    std::abs(scaledJ - limit_jacobian(c.model, dge, c.theta0, theta, 0));
                CHECK(err < prev);
                prev = err;
                if (n == 10000) CHECK(err < 0.05);
            }
        }
    }
}

TEST_CASE("second differences stay continuous between kinks") {
    const auto model = scaled(1.0);
    const auto dge = DgeSpec::from_id("simple");
    const auto s = draw(model, 2.0, 10, 98);
    const auto kinks = kink_points(model, dge, s, {0.5, 4.0});
    double lo = 0.5, hi = 4.0;  // trim to a kink-free stretch
    if (!kinks.points.empty()) hi = std::min(hi, kinks.points.front() - 0.05);
    std::vector<double> d2(50);
    double scale = 0.0;
    auto J = [&](double x) { return jacobian(model, dge, s, x); };
    for (int i = 0; i < 50; ++i) {
        const double t = lo + (hi - lo) * (i + 1) / 52.0;
        d2[i] = oracles::central_d2(J, t, 1e-4 * std::max(1.0, t));
        scale = std::max(scale, std::abs(d2[i]));
    }
    for (int i = 0; i + 1 < 50; ++i) {
        const double step_change = std::abs(d2[i + 1] - d2[i]);
        CHECK(step_change <= 1e-4 * std::max(1.0, scale) + 0.05 * scale * ((hi - lo) / 52.0));
    }
}

TEST_CASE("limit scaling convention: sums over i divide by n, statistics do not") {
    CHECK(jacobian_limit_scaling(kBiv, DgeSpec::from_id("simple"), 50) ==
          doctest::Approx(0.02));
    CHECK(jacobian_limit_scaling(kGamma, DgeSpec::from_id("invcdf:invx"), 50) ==
          doctest::Approx(0.02));
    CHECK(jacobian_limit_scaling(kBiv, DgeSpec::from_id("suffstat"), 50) == 1.0);
    CHECK(jacobian_limit_scaling(kBiv, DgeSpec::from_id("matched"), 50) == 1.0);
    // pinned constant Jacobians do not scale with n
    CHECK(jacobian_limit_scaling(kLoc, DgeSpec::from_id("simple"), 50) == 1.0);
    CHECK(jacobian_limit_scaling(kScale, DgeSpec::from_id("simple"), 50) == 1.0);
}
