#pragma once

#include "hdmr/common.hpp"
#include "hdmr/measure.hpp"

#include <cmath>
#include <vector>

namespace hdmr {

struct QuadratureRule {
    Vector nodes;
    Vector weights;  // probability weights, sum to 1
};

// Gauss-Legendre on [-1,1] by Newton iteration on the recurrence.
inline void gauss_legendre(int n, Vector& nodes, Vector& weights) {
    if (n < 1) throw InputError("gauss_legendre: need n >= 1");
    nodes.resize(n);
    weights.resize(n);
    int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

// Probability-weighted rule for one marginal law.
inline QuadratureRule marginal_quadrature(const Marginal& m, int points) {
    QuadratureRule rule;
    if (const auto* d = std::get_if<Discrete1D>(&m)) {
        rule.nodes.resize(static_cast<Eigen::Index>(d->values.size()));
        rule.weights.resize(static_cast<Eigen::Index>(d->values.size()));
        for (std::size_t i = 0; i < d->values.size(); ++i) {
            rule.nodes[static_cast<Eigen::Index>(i)] = d->values[i];
            rule.weights[static_cast<Eigen::Index>(i)] = d->probs[i];
        }
        return rule;
    }
    Vector gl_nodes, gl_weights;
    gauss_legendre(points, gl_nodes, gl_weights);
    if (const auto* u = std::get_if<Uniform1D>(&m)) {
        rule.nodes = ((gl_nodes.array() + 1.0) * 0.5 * (u->b - u->a) + u->a).matrix();
        rule.weights = gl_weights * 0.5;
        return rule;
    }
    const auto& be = std::get<Beta1D>(m);
    double log_norm = std::lgamma(be.a + be.b) - std::lgamma(be.a) - std::lgamma(be.b);
    rule.nodes = ((gl_nodes.array() + 1.0) * 0.5).matrix();
    rule.weights.resize(points);
    for (int i = 0; i < points; ++i) {
        double x = rule.nodes[i];
        double pdf = std::exp(log_norm + (be.a - 1.0) * std::log(x) + (be.b - 1.0) * std::log1p(-x));
        rule.weights[i] = gl_weights[i] * 0.5 * pdf;
    }
    rule.weights /= rule.weights.sum();
    return rule;
}

// Midpoint rule on [lo,hi]; integrates trigonometric polynomials of degree
// < points exactly over a full period, which the Fourier projections rely on.
inline QuadratureRule midpoint_rule(double lo, double hi, int points) {
    QuadratureRule rule;
    rule.nodes.resize(points);
    rule.weights = Vector::Constant(points, 1.0 / points);
    double h = (hi - lo) / points;
    for (int i = 0; i < points; ++i) rule.nodes[i] = lo + (i + 0.5) * h;
    return rule;
}

}  // namespace hdmr
