#pragma once

#include "hdmr/basis.hpp"
#include "hdmr/common.hpp"
#include "hdmr/subset.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace hdmr {

// One subspace's contribution f_u. Basis-backed components carry gamma_u and
// the orthogonal basis; recursively-built components carry only a closure.
struct ComponentFunction {
    VariableSubset subset;
    Vector coefficients;
    std::shared_ptr<const OrthogonalBasis> basis;
    std::function<double(const Vector&)> evaluator;

    double operator()(const Vector& x) const { return evaluator(x); }
    bool basis_backed() const { return basis != nullptr; }

    Polynomial as_polynomial() const {
        if (!basis) throw InputError("component has no basis representation");
        auto polys = basis->element_polynomials();
        Polynomial out(polys.empty() ? 0 : polys.front().n_vars());
        for (std::size_t j = 0; j < polys.size(); ++j)
            out += polys[j] * coefficients[static_cast<Eigen::Index>(j)];
        return out;
    }

    static ComponentFunction from_basis(std::shared_ptr<const OrthogonalBasis> basis, Vector gamma) {
        ComponentFunction c;
        c.subset = basis->subset();
        c.coefficients = std::move(gamma);
        c.basis = basis;
        c.evaluator = [basis = c.basis, gamma = c.coefficients](const Vector& x) {
            return gamma.dot(basis->evaluate(x));
        };
        return c;
    }
};

struct CovarianceTable {
    std::vector<VariableSubset> subsets;
    Matrix values;

    double at(const VariableSubset& u, const VariableSubset& v) const {
        return values(index_of(u), index_of(v));
    }
    Eigen::Index index_of(const VariableSubset& u) const {
        for (std::size_t i = 0; i < subsets.size(); ++i)
            if (subsets[i] == u) return static_cast<Eigen::Index>(i);
        throw InputError("covariance table: unknown subset " + u.label());
    }
    double total() const { return values.sum(); }
};

class HdmrModel {
  public:
    double constant = 0.0;
    int order = 0;
    int input_dimension = 0;
    std::map<VariableSubset, ComponentFunction> components;  // nonempty subsets
    CovarianceTable covariance;
    double total_variance = 0.0;
    std::string fitting_measure_id;
    BasisFamily family = BasisFamily::Monomial;
    int degree = 0;
    bool min_norm_fallback = false;
    std::vector<std::string> notes;

    double evaluate(const Vector& x, int max_order) const {
        if (static_cast<int>(x.size()) != input_dimension)
            throw ShapeError("HdmrModel::evaluate: point dimension != " +
                             std::to_string(input_dimension));
        if (max_order > order) throw InputError("HdmrModel::evaluate: max_order above model order");
        double acc = constant;
        for (const auto& [u, c] : components) {
            if (u.size() > max_order) break;  // graded order
            acc += c(x);
        }
        return acc;
    }

    double operator()(const Vector& x) const { return evaluate(x, order); }

    const CovarianceTable& variance_decomposition() const { return covariance; }

    // Explained variance of the reduced-order truncation, from the table.
    double explained_variance(int max_order) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < covariance.subsets.size(); ++i)
            for (std::size_t j = 0; j < covariance.subsets.size(); ++j)
                if (covariance.subsets[i].size() <= max_order &&
                    covariance.subsets[j].size() <= max_order)
                    acc += covariance.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        return acc;
    }
};

// Empirical covariance table of component evaluations on a weighted sample.
inline CovarianceTable component_covariance(const std::map<VariableSubset, ComponentFunction>& comps,
                                            const EmpiricalMeasure& measure) {
    CovarianceTable table;
    for (const auto& [u, c] : comps) table.subsets.push_back(u);
    Eigen::Index m = static_cast<Eigen::Index>(table.subsets.size());
    Matrix vals(measure.point_count(), m);
    Eigen::Index j = 0;
    for (const auto& [u, c] : comps) {
        for (Eigen::Index r = 0; r < measure.samples().rows(); ++r)
            vals(r, j) = c(measure.samples().row(r));
        ++j;
    }
    const Vector& w = measure.weights();
    Vector means = vals.transpose() * w;
    table.values.resize(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index b = a; b < m; ++b) {
            double cov = ((vals.col(a).array() - means[a]) * (vals.col(b).array() - means[b]) *
                          w.array())
                             .sum();
            table.values(a, b) = cov;
            table.values(b, a) = cov;
        }
    return table;
}

}  // namespace hdmr
