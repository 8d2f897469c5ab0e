#include "hdmr/measure.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace hdmr;
using Catch::Approx;

TEST_CASE("power law probabilities", "[measure]") {
    SECTION("alpha = 0 is uniform") {
        auto law = power_law(3, 0.0);
        for (double p : law.probabilities()) REQUIRE(p == Approx(1.0 / 3.0).epsilon(1e-14));
    }
    SECTION("k=2, alpha=1/2 hand normalization") {
        // weights (1, 1/sqrt(2)) normalized
        auto law = power_law(2, 0.5);
        REQUIRE(law.prob(1) == Approx(0.5857864376269049).epsilon(1e-12));
        REQUIRE(law.prob(2) == Approx(0.4142135623730951).epsilon(1e-12));
    }
    SECTION("normalization constant near k^(1-a)/(1-a) for large k") {
        auto law = power_law(2500, 0.5);
        double c_alpha = 1.0 / law.prob(1);  // weight of k=1 is exactly 1
        REQUIRE(c_alpha == Approx(100.0).epsilon(0.02));
    }
    SECTION("strictly decreasing for alpha > 0") {
        auto law = power_law(50, 0.3);
        for (int k = 2; k <= 50; ++k) REQUIRE(law.prob(k) < law.prob(k - 1));
    }
    SECTION("alpha outside [0,1) rejected") {
        REQUIRE_THROWS_AS(power_law(10, 1.0), DomainError);
        REQUIRE_THROWS_AS(power_law(10, -0.1), DomainError);
        REQUIRE_THROWS_AS(power_law(0, 0.5), InputError);
    }
}

TEST_CASE("sampling determinism and degeneracy", "[measure]") {
    SECTION("perfectly correlated Gaussian collapses to one column") {
        auto g = GaussianMeasure::standard(2, 1.0);
        auto em = sample(g, 100, 7);
        REQUIRE((em.samples().col(0) - em.samples().col(1)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("bit-reproducible for a fixed seed") {
        auto g = GaussianMeasure::bivariate(0.0, 1.0, 1.0, 2.0, 0.3);
        auto a = sample(g, 50, 123);
        auto b = sample(g, 50, 123);
        REQUIRE(a.samples() == b.samples());
        auto c = sample(g, 50, 124);
        REQUIRE(a.samples() != c.samples());
    }
    SECTION("uniform product sample matches mean 1/2 and stdev 1/sqrt(12)") {
        auto pm = ProductMeasure::iid(Uniform1D{0.0, 1.0}, 3);
        auto em = sample(pm, 100000, 42);
        for (int j = 0; j < 3; ++j) {
            double mean = em.samples().col(j).mean();
            double sd = std::sqrt((em.samples().col(j).array() - mean).square().mean());
            REQUIRE(mean == Approx(0.5).margin(0.01));
            REQUIRE(sd == Approx(0.28867513459481287).margin(0.01));
        }
    }
    SECTION("discrete draws stay in support with unit total frequency") {
        auto law = power_law(2500, 0.5);
        auto em = sample(law, 50, 99);
        REQUIRE(em.weights().sum() == Approx(1.0).epsilon(1e-12));
        for (int r = 0; r < 50; ++r) {
            double v = em.samples()(r, 0);
            REQUIRE(v >= 1.0);
            REQUIRE(v <= 2500.0);
            REQUIRE(v == std::floor(v));
        }
    }
    SECTION("non-PSD correlation rejected") {
        Matrix corr(2, 2);
        corr << 1.0, 1.5, 1.5, 1.0;
        REQUIRE_THROWS_AS(GaussianMeasure(Vector::Zero(2), Vector::Ones(2), corr), InputError);
    }
}

TEST_CASE("analytic moments", "[measure]") {
    SECTION("standard Gaussian second moment") {
        auto g = GaussianMeasure::standard(1);
        REQUIRE(g.moment({2}) == Approx(1.0).epsilon(1e-14));
    }
    SECTION("cross moment equals correlation") {
        auto g = GaussianMeasure::standard(2, 0.35);
        REQUIRE(g.moment({1, 1}) == Approx(0.35).epsilon(1e-14));
    }
    SECTION("Isserlis hand values at mu=0, sigma=1") {
        double rho = 0.4;
        auto g = GaussianMeasure::standard(2, rho);
        REQUIRE(g.moment({4, 0}) == Approx(3.0).epsilon(1e-13));
        REQUIRE(g.moment({2, 2}) == Approx(1.0 + 2.0 * rho * rho).epsilon(1e-13));
        REQUIRE(g.moment({3, 1}) == Approx(3.0 * rho).epsilon(1e-13));
        REQUIRE(g.moment({2, 1}) == Approx(0.0).margin(1e-14));
    }
    SECTION("iid product first moments multiply to mu^n") {
        // Uniform(0,1): mu = 1/2, so E[x1...x4] = (1/2)^4
        auto pm = ProductMeasure::iid(Uniform1D{0.0, 1.0}, 4);
        REQUIRE(pm.moment({1, 1, 1, 1}) == Approx(std::pow(0.5, 4)).epsilon(1e-14));
    }
    SECTION("beta moments give the paper's coefficient-of-variation pairs") {
        auto rho_of = [](double a, double b) {
            Marginal m = Beta1D{a, b};
            return marginal_stdev(m) / marginal_mean(m);
        };
        REQUIRE(rho_of(7.5, 7.5) == Approx(0.25).epsilon(1e-12));
        REQUIRE(rho_of(1.5, 1.5) == Approx(0.5).epsilon(1e-12));
        REQUIRE(rho_of(0.5, 1.5) == Approx(1.0).epsilon(1e-12));
    }
    SECTION("order cap raises instead of silently sampling") {
        auto g = GaussianMeasure::standard(1);
        REQUIRE_THROWS_AS(g.moment({17}), MomentOrderError);
        auto pm = ProductMeasure::iid(Uniform1D{0.0, 1.0}, 2);
        REQUIRE_THROWS_AS(pm.moment({9, 8}), MomentOrderError);
    }
    SECTION("empirical moments converge at the Monte Carlo rate") {
        auto g = GaussianMeasure::standard(1);
        for (int n : {1000, 100000}) {
            auto em = sample(g, n, 2024);
            double se = std::sqrt(2.0 / n);  // Var(x^2) = 2
            REQUIRE(std::abs(em.moment({2}) - 1.0) < 4.0 * se);
        }
    }
}

TEST_CASE("empirical measure validation", "[measure]") {
    Matrix s(2, 2);
    s << 1.0, 2.0, 3.0, 4.0;
    SECTION("weights must sum to one") {
        Vector w(2);
        w << 0.5, 0.6;
        REQUIRE_THROWS_AS(EmpiricalMeasure(s, w), InputError);
    }
    SECTION("negative weights rejected") {
        Vector w(2);
        w << -0.1, 1.1;
        REQUIRE_THROWS_AS(EmpiricalMeasure(s, w), InputError);
    }
    SECTION("non-finite samples rejected") {
        Matrix bad = s;
        bad(0, 0) = std::nan("");
        REQUIRE_THROWS_AS(EmpiricalMeasure::equal_weights(bad), InputError);
    }
    SECTION("weighted moment") {
        Vector w(2);
        w << 0.25, 0.75;
        EmpiricalMeasure em(s, w);
        REQUIRE(em.moment({1, 0}) == Approx(0.25 * 1.0 + 0.75 * 3.0).epsilon(1e-14));
        REQUIRE(em.moment({1, 1}) == Approx(0.25 * 2.0 + 0.75 * 12.0).epsilon(1e-14));
    }
}

TEST_CASE("gaussian conditional law", "[measure]") {
    double rho = 0.6;
    auto g = GaussianMeasure::bivariate(0.0, 0.0, 1.0, 1.0, rho);
    auto cond = g.conditional({0});
    REQUIRE(cond.rest == std::vector<int>{1});
    REQUIRE(cond.coef(0, 0) == Approx(rho).epsilon(1e-12));
    REQUIRE(cond.offset[0] == Approx(0.0).margin(1e-14));
    REQUIRE(cond.cov(0, 0) == Approx(1.0 - rho * rho).epsilon(1e-12));
}
