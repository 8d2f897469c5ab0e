#include "hdmr/fit.hpp"

#include "hdmr/io.hpp"
#include "hdmr/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace hdmr;
using Catch::Approx;

namespace {

// Tensor quadrature grid as a weighted empirical measure; makes empirical
// fitting exact for polynomial targets.
EmpiricalMeasure grid_measure(const ProductMeasure& pm, int points) {
    std::vector<QuadratureRule> rules;
    for (const auto& m : pm.marginals()) rules.push_back(marginal_quadrature(m, points));
    int n = pm.dimension();
    std::size_t total = 1;
    for (const auto& r : rules) total *= static_cast<std::size_t>(r.nodes.size());
    Matrix samples(static_cast<Eigen::Index>(total), n);
    Vector weights(static_cast<Eigen::Index>(total));
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        double w = 1.0;
        for (int j = 0; j < n; ++j) {
            samples(static_cast<Eigen::Index>(flat), j) = rules[static_cast<std::size_t>(j)].nodes[idx[static_cast<std::size_t>(j)]];
            w *= rules[static_cast<std::size_t>(j)].weights[idx[static_cast<std::size_t>(j)]];
        }
        weights[static_cast<Eigen::Index>(flat)] = w;
        for (int j = 0; j < n; ++j) {
            if (++idx[static_cast<std::size_t>(j)] < rules[static_cast<std::size_t>(j)].nodes.size()) break;
            idx[static_cast<std::size_t>(j)] = 0;
        }
    }
    weights /= weights.sum();
    return EmpiricalMeasure(std::move(samples), std::move(weights));
}

double l2_error_under(const Measure& m, const Polynomial& a, const Polynomial& b) {
    Polynomial d = a - b;
    return expectation(m, d * d);
}

}  // namespace

TEST_CASE("variational fit on the bivariate Gaussian polynomial", "[hdmr]") {
    BasisSpec spec{BasisFamily::Monomial, 2, 2};

    SECTION("constant targets project to the mean") {
        auto em = sample(GaussianMeasure::standard(2, 0.3), 2000, 17);
        auto model = fit([](const Vector&) { return 4.2; }, em, spec);
        REQUIRE(model.constant == Approx(4.2).margin(1e-10));
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> dist(-2.0, 2.0);
        for (int i = 0; i < 20; ++i) {
            Vector x(2);
            x << dist(rng), dist(rng);
            for (const auto& [u, c] : model.components) REQUIRE(c(x) == Approx(0.0).margin(1e-10));
        }
    }

    SECTION("rho=1/2 component matches the closed form within 2% of Var(f)") {
        oracles::GaussPolyParams p;
        p.rho = 0.5;
        auto em = sample(p.measure(), 10000, 23);
        Polynomial target = oracles::gauss_poly_target(p);
        auto model = fit([&](const Vector& x) { return target.evaluate(x); }, em, spec);
        auto comps = oracles::gauss_poly_components(p);
        Measure gm = p.measure();
        double var_f = variance_of(gm, target);
        Polynomial fitted_f1 = model.components.at(VariableSubset({0})).as_polynomial();
        REQUIRE(l2_error_under(gm, fitted_f1, comps.f1) < 0.02 * var_f);
        REQUIRE(model.constant == Approx(comps.f0).margin(0.05));
    }

    SECTION("independent inputs produce mutually orthogonal components") {
        oracles::GaussPolyParams p;  // rho = 0
        // sibling covariance on the fitting sample decays like 1/sqrt(N)
        auto em = sample(p.measure(), 1000000, 29);
        Polynomial target = oracles::gauss_poly_target(p);
        auto model = fit([&](const Vector& x) { return target.evaluate(x); }, em, spec);
        double cov12 = model.covariance.at(VariableSubset({0}), VariableSubset({1}));
        REQUIRE(std::abs(cov12) < 1e-3 * model.total_variance);
    }

    SECTION("full-order model interpolates a degree-2 target at rho=0.9") {
        oracles::GaussPolyParams p;
        p.rho = 0.9;
        auto em = sample(p.measure(), 5000, 31);
        Polynomial target = oracles::gauss_poly_target(p);
        auto model = fit([&](const Vector& x) { return target.evaluate(x); }, em, spec);
        double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
        for (int r = 0; r < em.point_count(); ++r) mean += em.weights()[r] * target.evaluate(em.samples().row(r));
        for (int r = 0; r < em.point_count(); ++r) {
            Vector x = em.samples().row(r);
            double y = target.evaluate(x);
            double pred = model(x);
            ss_res += em.weights()[r] * (y - pred) * (y - pred);
            ss_tot += em.weights()[r] * (y - mean) * (y - mean);
        }
        REQUIRE(1.0 - ss_res / ss_tot >= 0.999);
    }

    SECTION("underdetermined system falls back to the least-norm solution") {
        Matrix pts(6, 2);
        pts << 0.1, -0.2, 0.4, 0.5, -1.0, 0.3, 0.7, -0.8, 1.1, 0.9, -0.5, -0.6;
        auto em = EmpiricalMeasure::equal_weights(pts);
        auto model = fit([](const Vector& x) { return x[0] + x[1]; }, em, spec);
        REQUIRE(model.min_norm_fallback);
    }

    SECTION("evaluate at order zero returns the constant") {
        oracles::GaussPolyParams p;
        auto em = sample(p.measure(), 2000, 37);
        Polynomial target = oracles::gauss_poly_target(p);
        auto model = fit([&](const Vector& x) { return target.evaluate(x); }, em, spec);
        Vector x(2);
        x << 0.4, -1.2;
        REQUIRE(model.evaluate(x, 0) == Approx(model.constant));
        Vector bad(3);
        bad << 1, 2, 3;
        REQUIRE_THROWS_AS(model.evaluate(bad, 0), ShapeError);
    }
}

TEST_CASE("variance decomposition tables", "[hdmr]") {
    BasisSpec spec{BasisFamily::Monomial, 2, 2};
    oracles::GaussPolyParams p;
    p.rho = 0.6;
    auto em = sample(p.measure(), 20000, 41);
    Polynomial target = oracles::gauss_poly_target(p);
    auto model = fit([&](const Vector& x) { return target.evaluate(x); }, em, spec);
    const auto& table = model.variance_decomposition();

    SECTION("nested pairs vanish, siblings do not") {
        REQUIRE(table.at(VariableSubset({0, 1}), VariableSubset({0})) == Approx(0.0).margin(1e-8));
        REQUIRE(table.at(VariableSubset({0, 1}), VariableSubset({1})) == Approx(0.0).margin(1e-8));
        REQUIRE(std::abs(table.at(VariableSubset({0}), VariableSubset({1}))) > 0.01);
        for (Eigen::Index i = 0; i < table.values.rows(); ++i) REQUIRE(table.values(i, i) >= 0.0);
    }
    SECTION("entries sum to the target variance for full-order fits") {
        REQUIRE(table.total() == Approx(model.total_variance).epsilon(1e-6));
    }
    SECTION("coefficient-space covariance agrees with the sample table") {
        // Diagonal blocks of an orthonormal basis: Var(f_u) = |gamma_u|^2.
        for (const auto& [u, c] : model.components)
            REQUIRE(table.at(u, u) == Approx(c.coefficients.squaredNorm()).margin(1e-6));
    }
}

TEST_CASE("fit invariants", "[hdmr]") {
    BasisSpec spec{BasisFamily::Monomial, 2, 2};
    oracles::GaussPolyParams p;
    p.rho = 0.5;
    auto em = sample(p.measure(), 4000, 43);
    Polynomial target = oracles::gauss_poly_target(p);
    auto predictor = [&](const Vector& x) { return target.evaluate(x); };
    auto model = fit(predictor, em, spec);

    SECTION("projection is idempotent") {
        auto refit = fit([&](const Vector& x) { return model(x); }, em, spec);
        for (const auto& [u, c] : model.components) {
            const auto& c2 = refit.components.at(u);
            REQUIRE((c.coefficients - c2.coefficients).cwiseAbs().maxCoeff() < 1e-8);
        }
        REQUIRE(refit.constant == Approx(model.constant).margin(1e-8));
    }

    SECTION("residual is orthogonal to every basis column") {
        Vector resid(em.point_count());
        for (int r = 0; r < em.point_count(); ++r) {
            Vector x = em.samples().row(r);
            resid[r] = predictor(x) - model(x);
        }
        for (const auto& [u, c] : model.components) {
            Matrix cols = c.basis->columns(em.samples());
            Vector ip = cols.transpose() * (em.weights().asDiagonal() * resid);
            REQUIRE(ip.cwiseAbs().maxCoeff() < 1e-6);
        }
    }

    SECTION("components superpose linearly") {
        Polynomial g = Polynomial::monomial(2, {2, 0}, 1.0) - Polynomial::variable(2, 1, 2.0);
        auto model_f = model;
        auto model_g = fit([&](const Vector& x) { return g.evaluate(x); }, em, spec);
        double a = 2.5, b = -1.25;
        auto model_ab = fit(
            [&](const Vector& x) { return a * target.evaluate(x) + b * g.evaluate(x); }, em, spec);
        for (const auto& [u, c] : model_ab.components) {
            Vector expect = a * model_f.components.at(u).coefficients +
                            b * model_g.components.at(u).coefficients;
            REQUIRE((c.coefficients - expect).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("recursive construction on product measures", "[hdmr]") {
    SECTION("product function components follow the closed form") {
        double mu = 0.5;  // Uniform(0,1)
        auto pm = ProductMeasure::iid(Uniform1D{0.0, 1.0}, 3);
        BasisSpec spec{BasisFamily::Monomial, 1, 3};
        auto model = fit_recursive(
            [](const Vector& x) { return x[0] * x[1] * x[2]; }, pm, spec, 24);
        REQUIRE(model.constant == Approx(std::pow(mu, 3)).margin(1e-10));
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (int i = 0; i < 20; ++i) {
            Vector x(3);
            x << dist(rng), dist(rng), dist(rng);
            double expected = mu * mu * x[0] - std::pow(mu, 3);
            REQUIRE(model.components.at(VariableSubset({0}))(x) == Approx(expected).margin(1e-9));
        }
    }

    SECTION("additive targets have no interactions") {
        auto pm = ProductMeasure::iid(Uniform1D{-1.0, 1.0}, 3);
        BasisSpec spec{BasisFamily::Monomial, 2, 2};
        auto model = fit_recursive(
            [](const Vector& x) { return std::sin(x[0]) + x[1] * x[1] + std::exp(x[2]); }, pm, spec,
            32);
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int i = 0; i < 20; ++i) {
            Vector x(3);
            x << dist(rng), dist(rng), dist(rng);
            for (const auto& [u, c] : model.components)
                if (u.size() > 1) REQUIRE(c(x) == Approx(0.0).margin(1e-8));
        }
    }

    SECTION("Ishigami null components vanish") {
        auto pm = ProductMeasure::iid(Uniform1D{-std::numbers::pi, std::numbers::pi}, 3);
        BasisSpec spec{BasisFamily::Fourier, 4, 2};
        oracles::IshigamiParams ip{7.0, 0.1};
        auto model = fit_recursive(
            [&](const Vector& x) { return oracles::ishigami(ip, x); }, pm, spec, 64);
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> dist(-std::numbers::pi, std::numbers::pi);
        for (int i = 0; i < 20; ++i) {
            Vector x(3);
            x << dist(rng), dist(rng), dist(rng);
            REQUIRE(model.components.at(VariableSubset({2}))(x) == Approx(0.0).margin(1e-6));
            REQUIRE(model.components.at(VariableSubset({0, 1}))(x) == Approx(0.0).margin(1e-6));
        }
    }

    SECTION("correlated measures are rejected") {
        BasisSpec spec{BasisFamily::Monomial, 2, 2};
        REQUIRE_THROWS_AS(fit_recursive([](const Vector&) { return 0.0; },
                                        GaussianMeasure::standard(2, 0.4), spec),
                          InputError);
    }

    SECTION("agrees with the variational fit on a shared quadrature measure") {
        auto pm = ProductMeasure::iid(Uniform1D{0.0, 1.0}, 3);
        Polynomial target(3);
        target += Polynomial::variable(3, 0);
        target += Polynomial::monomial(3, {0, 2, 0}, 1.5);
        target += Polynomial::monomial(3, {1, 0, 1}, -2.0);
        target += Polynomial::monomial(3, {1, 2, 0}, 0.75);
        auto predictor = [&](const Vector& x) { return target.evaluate(x); };

        BasisSpec spec{BasisFamily::Monomial, 2, 3};
        auto recursive = fit_recursive(predictor, pm, spec, 16);
        auto fitted = fit(predictor, grid_measure(pm, 16), spec);

        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> dist(0.0, 1.0);
        for (int i = 0; i < 100; ++i) {
            Vector x(3);
            x << dist(rng), dist(rng), dist(rng);
            for (const auto& [u, c] : recursive.components)
                REQUIRE(c(x) == Approx(fitted.components.at(u)(x)).margin(1e-6));
        }
        REQUIRE(recursive.constant == Approx(fitted.constant).margin(1e-8));
    }
}

TEST_CASE("reduced-order explained variance tracks the product oracle", "[hdmr]") {
    // n = 3 iid uniform with rho = 1/2 (mu = 1, sigma = 1/2)
    double mu = 1.0, sigma = 0.5;
    double hw = sigma * std::sqrt(3.0);
    auto pm = ProductMeasure::iid(Uniform1D{mu - hw, mu + hw}, 3);
    auto em = sample(pm, 20000, 47);
    BasisSpec spec{BasisFamily::Monomial, 1, 3};
    auto model = fit([](const Vector& x) { return x[0] * x[1] * x[2]; }, em, spec);
    double cum = 0.0;
    for (int k = 1; k <= 3; ++k) {
        cum += oracles::product_pk(3, k, 0.5);
        REQUIRE(model.explained_variance(k) / model.total_variance == Approx(cum).margin(0.02));
    }
}

TEST_CASE("model serialization round trip", "[hdmr]") {
    BasisSpec spec{BasisFamily::Monomial, 2, 2};
    oracles::GaussPolyParams p;
    p.rho = 0.5;
    auto em = sample(p.measure(), 3000, 53);
    Polynomial target = oracles::gauss_poly_target(p);
    auto model = fit([&](const Vector& x) { return target.evaluate(x); }, em, spec);

    json j = model_to_json(model);
    REQUIRE(j.contains("version"));
    auto loaded = model_from_json(j);

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int i = 0; i < 50; ++i) {
        Vector x(2);
        x << dist(rng), dist(rng);
        REQUIRE(loaded(x) == Approx(model(x)).margin(1e-12));
        REQUIRE(loaded.evaluate(x, 1) == Approx(model.evaluate(x, 1)).margin(1e-12));
    }
    REQUIRE(loaded.total_variance == Approx(model.total_variance));
    REQUIRE(loaded.covariance.total() == Approx(model.covariance.total()));
}
