#include "hdmr/sensitivity.hpp"

#include "hdmr/fit.hpp"
#include "hdmr/io.hpp"
#include "hdmr/oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace hdmr;
using Catch::Approx;

namespace {

EmpiricalMeasure grid_measure2(const ProductMeasure& pm, int points) {
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
            samples(static_cast<Eigen::Index>(flat), j) =
                rules[static_cast<std::size_t>(j)].nodes[idx[static_cast<std::size_t>(j)]];
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

}  // namespace

TEST_CASE("scsa on the analytic bivariate model", "[sensitivity]") {
    SECTION("rho = 0: 2/3 first order, 1/3 interaction, no correlative part") {
        auto report = scsa(oracles::gauss_poly_model({}));
        double s1 = report.per_subset.at(VariableSubset({0})).overall;
        double s2 = report.per_subset.at(VariableSubset({1})).overall;
        double s12 = report.per_subset.at(VariableSubset({0, 1})).overall;
        REQUIRE(s1 + s2 == Approx(2.0 / 3.0).margin(1e-10));
        REQUIRE(s12 == Approx(1.0 / 3.0).margin(1e-10));
        for (const auto& [u, t] : report.per_subset)
            REQUIRE(t.correlative == Approx(0.0).margin(1e-12));
    }
    SECTION("rho = +/-1 keeps total share 1 while the pair structure collapses") {
        for (double rho : {-1.0, 1.0}) {
            oracles::GaussPolyParams p;
            p.rho = rho;
            auto report = scsa(oracles::gauss_poly_model(p));
            double total = 0.0;
            for (const auto& [u, t] : report.per_subset) total += t.overall;
            REQUIRE(total == Approx(1.0).margin(1e-9));
            REQUIRE(report.per_subset.at(VariableSubset({0, 1})).structural ==
                    Approx(0.0).margin(1e-9));
        }
    }
    SECTION("maximal subset has no correlative share at any rho") {
        for (double rho : {-0.9, -0.5, 0.3, 0.8}) {
            oracles::GaussPolyParams p;
            p.rho = rho;
            auto report = scsa(oracles::gauss_poly_model(p));
            REQUIRE(report.per_subset.at(VariableSubset({0, 1})).correlative ==
                    Approx(0.0).margin(1e-8));
        }
    }
    SECTION("closed-form indices match the model route") {
        oracles::GaussPolyParams p;
        p.rho = 0.6;
        auto ix = oracles::gauss_poly_indices(p);
        auto report = scsa(oracles::gauss_poly_model(p));
        REQUIRE(report.per_subset.at(VariableSubset({0})).structural ==
                Approx(ix.s1.structural).margin(1e-10));
        REQUIRE(report.per_subset.at(VariableSubset({0})).correlative ==
                Approx(ix.s1.correlative).margin(1e-10));
        REQUIRE(report.per_subset.at(VariableSubset({0, 1})).overall ==
                Approx(ix.s12.overall).margin(1e-10));
    }
    SECTION("zero-variance model is degenerate") {
        HdmrModel empty;
        empty.total_variance = 0.0;
        REQUIRE_THROWS_AS(scsa(empty), DegenerateError);
    }
}

TEST_CASE("scsa on the Ishigami function", "[sensitivity]") {
    oracles::IshigamiParams p{7.0, 0.1};
    auto ix = oracles::ishigami_indices(p);

    SECTION("analytic model reproduces the closed forms with paper T and R") {
        auto report = scsa(oracles::ishigami_model(p));
        REQUIRE(report.per_subset.at(VariableSubset({0})).overall == Approx(ix.s1).margin(1e-12));
        REQUIRE(report.per_subset.at(VariableSubset({1})).overall == Approx(ix.s2).margin(1e-12));
        REQUIRE(report.per_subset.at(VariableSubset({0, 2})).overall == Approx(ix.s13).margin(1e-12));
        // T includes the singleton share plus every interaction containing i
        REQUIRE(report.total.at(0) == Approx(0.56).margin(5e-3));
        REQUIRE(report.total.at(1) == Approx(0.44).margin(5e-3));
        REQUIRE(report.total.at(2) == Approx(0.24).margin(5e-3));
        REQUIRE(report.relative.at(0) == Approx(0.45).margin(5e-3));
        REQUIRE(report.relative.at(1) == Approx(0.36).margin(5e-3));
        REQUIRE(report.relative.at(2) == Approx(0.20).margin(5e-3));
    }
    SECTION("recursive quadrature fit matches the closed forms to 1e-4") {
        auto pm = ProductMeasure::iid(Uniform1D{-std::numbers::pi, std::numbers::pi}, 3);
        BasisSpec spec{BasisFamily::Fourier, 4, 2};
        auto model = fit_recursive([&](const Vector& x) { return oracles::ishigami(p, x); }, pm,
                                   spec, 128);
        auto report = scsa(model);
        REQUIRE(report.per_subset.at(VariableSubset({0})).overall == Approx(ix.s1).margin(1e-4));
        REQUIRE(report.per_subset.at(VariableSubset({1})).overall == Approx(ix.s2).margin(1e-4));
        REQUIRE(report.per_subset.at(VariableSubset({0, 2})).overall == Approx(ix.s13).margin(1e-4));
        for (const auto& [u, t] : report.per_subset)
            if (u != VariableSubset({0}) && u != VariableSubset({1}) && u != VariableSubset({0, 2}))
                REQUIRE(std::abs(t.overall) <= 0.01);
    }
}

TEST_CASE("full-order share sums", "[sensitivity]") {
    SECTION("correlated empirical fit sums to one") {
        oracles::GaussPolyParams p;
        p.rho = 0.5;
        auto em = sample(p.measure(), 20000, 61);
        Polynomial target = oracles::gauss_poly_target(p);
        BasisSpec spec{BasisFamily::Monomial, 2, 2};
        auto model = fit([&](const Vector& x) { return target.evaluate(x); }, em, spec);
        auto report = scsa(model);
        double total = 0.0, structural = 0.0;
        for (const auto& [u, t] : report.per_subset) {
            total += t.overall;
            structural += t.structural;
        }
        REQUIRE(total == Approx(1.0).margin(1e-6));
        REQUIRE(structural < 1.0);  // strictly, under correlation
    }
    SECTION("product measure on a quadrature grid: structural only") {
        auto pm = ProductMeasure::iid(Uniform1D{0.0, 1.0}, 2);
        auto em = grid_measure2(pm, 24);
        BasisSpec spec{BasisFamily::Monomial, 2, 2};
        auto model = fit([](const Vector& x) { return x[0] + x[1] * x[1] + x[0] * x[1]; }, em, spec);
        auto report = scsa(model);
        double structural = 0.0;
        for (const auto& [u, t] : report.per_subset) {
            structural += t.structural;
            REQUIRE(std::abs(t.correlative) <= 1e-3);
        }
        REQUIRE(structural == Approx(1.0).margin(1e-3));
    }
    SECTION("relative importances are scale invariant") {
        oracles::GaussPolyParams p;
        p.rho = 0.4;
        auto em = sample(p.measure(), 5000, 67);
        Polynomial target = oracles::gauss_poly_target(p);
        BasisSpec spec{BasisFamily::Monomial, 2, 2};
        auto m1 = fit([&](const Vector& x) { return target.evaluate(x); }, em, spec);
        auto m2 = fit([&](const Vector& x) { return -5.5 * target.evaluate(x); }, em, spec);
        auto r1 = scsa(m1), r2 = scsa(m2);
        for (const auto& [i, r] : r1.relative) REQUIRE(r2.relative.at(i) == Approx(r).margin(1e-10));
    }
}

TEST_CASE("level-set queries", "[sensitivity]") {
    oracles::IshigamiParams p{7.0, 0.1};
    auto report = scsa(oracles::ishigami_model(p));

    SECTION("interaction query at 0.05 selects exactly (1,3)") {
        auto sel = level_set_query(report, LevelSetQuery::InteractionEps, 0.05);
        REQUIRE(sel.subsets.size() == 1);
        REQUIRE(sel.subsets[0] == VariableSubset({0, 2}));
        REQUIRE(sel.subsets[0].label() == "(1,3)");
    }
    SECTION("zero threshold keeps every variable") {
        auto sel = level_set_query(report, LevelSetQuery::TotalEps, 0.0);
        REQUIRE(sel.variables.size() == 3);
    }
    SECTION("selections shrink as epsilon grows") {
        std::size_t prev = 100;
        for (double eps : {0.0, 0.1, 0.3, 0.5}) {
            auto sel = level_set_query(report, LevelSetQuery::ProfileEps, eps);
            REQUIRE(sel.subsets.size() <= prev);
            prev = sel.subsets.size();
        }
        REQUIRE_THROWS_AS(level_set_query(report, LevelSetQuery::TotalEps, -0.1), DomainError);
    }
    SECTION("reduced order on the model and on closed-form shares") {
        auto sel = level_set_query(report, LevelSetQuery::ReducedOrder, 0.05);
        REQUIRE(sel.reduced_order == 2);  // S1 + S2 = 0.76 < 0.95, adding pairs reaches 1
        // n = 100 product function at rho = 1/4: min T with 90% explained
        std::vector<double> shares;
        for (int k = 1; k <= 100; ++k) shares.push_back(oracles::product_pk(100, k, 0.25));
        int T = reduced_order_from_shares(shares, 0.1);
        REQUIRE(T == 9);
        double below = 0.0, at = 0.0;
        for (int k = 1; k <= T; ++k) at += shares[static_cast<std::size_t>(k - 1)];
        for (int k = 1; k < T; ++k) below += shares[static_cast<std::size_t>(k - 1)];
        REQUIRE(at >= 0.9);
        REQUIRE(below < 0.9);
    }
}

TEST_CASE("report output formats", "[sensitivity]") {
    auto report = scsa(oracles::ishigami_model({7.0, 0.1}));
    SECTION("json carries per-subset and per-variable tables") {
        json j = report_to_json(report);
        REQUIRE(j.contains("per_subset"));
        REQUIRE(j.contains("per_variable"));
        REQUIRE(j["per_variable"].size() == 3);
    }
    SECTION("text table is aligned and closes with totals") {
        std::string table = report_table(report, {"a", "b", "c"});
        REQUIRE(table.find("Subspace") != std::string::npos);
        REQUIRE(table.find("(1,3)") != std::string::npos);
        REQUIRE(table.find("(total)") != std::string::npos);
    }
}
