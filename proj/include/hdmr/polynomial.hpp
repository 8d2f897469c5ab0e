#pragma once

#include "hdmr/common.hpp"

#include <cmath>
#include <map>
#include <vector>

namespace hdmr {

// Sparse multivariate polynomial over a fixed number of variables. Exponent
// vectors are dense and all the same length. Degrees stay small here (kernel
// machines top out around total degree 8), so a map is plenty.
class Polynomial {
  public:
    using Exponents = std::vector<int>;

    explicit Polynomial(int n_vars = 0) : n_(n_vars) {}

    static Polynomial constant(int n_vars, double c) {
        Polynomial p(n_vars);
        if (c != 0.0) p.terms_[Exponents(static_cast<std::size_t>(n_vars), 0)] = c;
        return p;
    }

    static Polynomial variable(int n_vars, int var, double coeff = 1.0) {
        Polynomial p(n_vars);
        Exponents e(static_cast<std::size_t>(n_vars), 0);
        e[static_cast<std::size_t>(var)] = 1;
        p.terms_[e] = coeff;
        return p;
    }

    static Polynomial monomial(int n_vars, const Exponents& exps, double coeff) {
        Polynomial p(n_vars);
        if (static_cast<int>(exps.size()) != n_vars) throw ShapeError("Polynomial: exponent size");
        if (coeff != 0.0) p.terms_[exps] = coeff;
        return p;
    }

    int n_vars() const { return n_; }
    const std::map<Exponents, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const Exponents& e, double c) {
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            if (c != 0.0) terms_[e] = c;
        } else {
            it->second += c;
            if (std::abs(it->second) < 1e-300) terms_.erase(it);
        }
    }

    Polynomial& operator+=(const Polynomial& o) {
        check_same(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        check_same(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    Polynomial& operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
    friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        a.check_same(b);
        Polynomial out(a.n_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                Exponents e = ea;
                for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
                out.add_term(e, ca * cb);
            }
        return out;
    }

    double evaluate(const Vector& x) const {
        if (x.size() != n_) throw ShapeError("Polynomial::evaluate: point dimension");
        double acc = 0.0;
        for (const auto& [e, c] : terms_) {
            double t = c;
            for (std::size_t i = 0; i < e.size(); ++i)
                for (int p = 0; p < e[i]; ++p) t *= x[static_cast<Eigen::Index>(i)];
            acc += t;
        }
        return acc;
    }

    Polynomial derivative(int var) const {
        Polynomial out(n_);
        for (const auto& [e, c] : terms_) {
            int p = e[static_cast<std::size_t>(var)];
            if (p == 0) continue;
            Exponents d = e;
            --d[static_cast<std::size_t>(var)];
            out.add_term(d, c * p);
        }
        return out;
    }

    Polynomial derivative(const Exponents& order) const {
        Polynomial out = *this;
        for (std::size_t v = 0; v < order.size(); ++v)
            for (int k = 0; k < order[v]; ++k) out = out.derivative(static_cast<int>(v));
        return out;
    }

    int total_degree() const {
        int deg = 0;
        for (const auto& [e, c] : terms_) {
            int d = 0;
            for (int p : e) d += p;
            deg = std::max(deg, d);
        }
        return deg;
    }

    // Substitute each variable with a polynomial over a (possibly different)
    // variable set. Used for conditional-Gaussian reparameterizations.
    Polynomial substitute(const std::vector<Polynomial>& images) const {
        if (static_cast<int>(images.size()) != n_) throw ShapeError("Polynomial::substitute");
        int m = images.empty() ? 0 : images[0].n_vars();
        Polynomial out(m);
        for (const auto& [e, c] : terms_) {
            Polynomial term = Polynomial::constant(m, c);
            for (std::size_t v = 0; v < e.size(); ++v)
                for (int p = 0; p < e[v]; ++p) term = term * images[v];
            out += term;
        }
        return out;
    }

    // Expectation given a per-monomial moment functor E[x^e].
    double expectation(const std::function<double(const Exponents&)>& moment) const {
        double acc = 0.0;
        for (const auto& [e, c] : terms_) acc += c * moment(e);
        return acc;
    }

    // Restrict to the variables in `keep` (all other exponents must be zero),
    // renumbering to the compressed index space.
    Polynomial restrict_to(const std::vector<int>& keep) const {
        Polynomial out(static_cast<int>(keep.size()));
        std::vector<int> pos(static_cast<std::size_t>(n_), -1);
        for (std::size_t i = 0; i < keep.size(); ++i) pos[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
        for (const auto& [e, c] : terms_) {
            Exponents r(keep.size(), 0);
            for (std::size_t v = 0; v < e.size(); ++v) {
                if (e[v] == 0) continue;
                if (pos[v] < 0) throw InputError("Polynomial::restrict_to: term uses a dropped variable");
                r[static_cast<std::size_t>(pos[v])] = e[v];
            }
            out.add_term(r, c);
        }
        return out;
    }

  private:
    void check_same(const Polynomial& o) const {
        if (n_ != o.n_) throw ShapeError("Polynomial: mixed variable counts");
    }

    int n_;
    std::map<Exponents, double> terms_;
};

}  // namespace hdmr
