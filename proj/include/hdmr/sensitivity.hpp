#pragma once

#include "hdmr/common.hpp"
#include "hdmr/model.hpp"
#include "hdmr/subset.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace hdmr {

struct ScsaTriple {
    double structural = 0.0;  // S^a_u = Var(f_u)/Var(f)
    double correlative = 0.0; // S^b_u = sum_{v != u} Cov(f_u, f_v)/Var(f)
    double overall = 0.0;     // S_u
};

struct SensitivityReport {
    std::map<VariableSubset, ScsaTriple> per_subset;
    std::map<int, double> total;     // T_i, subsets containing i (u = {i} included)
    std::map<int, double> relative;  // R_i = T_i / sum_j T_j
    double total_variance = 0.0;
    std::string fitting_measure_id;
};

inline SensitivityReport scsa(const HdmrModel& model) {
    if (!(model.total_variance > 0.0))
        throw DegenerateError("scsa: model has zero target variance");
    SensitivityReport report;
    report.total_variance = model.total_variance;
    report.fitting_measure_id = model.fitting_measure_id;

    const auto& table = model.covariance;
    Eigen::Index m = static_cast<Eigen::Index>(table.subsets.size());
    for (Eigen::Index i = 0; i < m; ++i) {
        ScsaTriple t;
        t.structural = table.values(i, i) / model.total_variance;
        double off = 0.0;
        for (Eigen::Index j = 0; j < m; ++j)
            if (j != i) off += table.values(i, j);
        t.correlative = off / model.total_variance;
        t.overall = t.structural + t.correlative;
        report.per_subset[table.subsets[static_cast<std::size_t>(i)]] = t;
    }

    for (int var = 0; var < model.input_dimension; ++var) {
        double acc = 0.0;
        for (const auto& [u, t] : report.per_subset)
            if (u.contains(var)) acc += t.overall;
        report.total[var] = acc;
    }
    double tsum = 0.0;
    for (const auto& [i, t] : report.total) tsum += t;
    for (const auto& [i, t] : report.total)
        report.relative[i] = tsum != 0.0 ? t / tsum : 0.0;
    return report;
}

enum class LevelSetQuery { TotalEps, RelativeEps, IndividualEps, InteractionEps, ProfileEps, ReducedOrder };

struct LevelSetSelection {
    std::vector<int> variables;           // T_eps / R_eps
    std::vector<VariableSubset> subsets;  // I_eps / X_eps / P_eps
    int reduced_order = 0;                // ReducedOrder
};

inline LevelSetSelection level_set_query(const SensitivityReport& report, LevelSetQuery query,
                                         double epsilon) {
    if (epsilon < 0.0) throw DomainError("level_set_query: epsilon must be >= 0");
    LevelSetSelection out;
    switch (query) {
        case LevelSetQuery::TotalEps:
            for (const auto& [i, t] : report.total)
                if (t >= epsilon) out.variables.push_back(i);
            break;
        case LevelSetQuery::RelativeEps:
            for (const auto& [i, r] : report.relative)
                if (r >= epsilon) out.variables.push_back(i);
            break;
        case LevelSetQuery::IndividualEps:
            for (const auto& [u, t] : report.per_subset)
                if (u.size() == 1 && t.overall >= epsilon) out.subsets.push_back(u);
            break;
        case LevelSetQuery::InteractionEps:
            for (const auto& [u, t] : report.per_subset)
                if (u.size() > 1 && t.overall >= epsilon) out.subsets.push_back(u);
            break;
        case LevelSetQuery::ProfileEps:
            for (const auto& [u, t] : report.per_subset)
                if (t.overall >= epsilon) out.subsets.push_back(u);
            break;
        case LevelSetQuery::ReducedOrder: {
            int max_size = 0;
            for (const auto& [u, t] : report.per_subset) max_size = std::max(max_size, u.size());
            double target = 1.0 - epsilon;
            for (int T = 0; T <= max_size; ++T) {
                double acc = 0.0;
                for (const auto& [u, t] : report.per_subset)
                    if (u.size() <= T) acc += t.overall;
                if (acc >= target) {
                    out.reduced_order = T;
                    return out;
                }
            }
            out.reduced_order = max_size;
            break;
        }
    }
    return out;
}

// Reduced-order query over per-order aggregate shares (order_shares[k-1] is
// the total share of the size-k subspaces); used when subsets are too many to
// enumerate, e.g. the closed-form product function at n = 100.
inline int reduced_order_from_shares(const std::vector<double>& order_shares, double epsilon) {
    if (epsilon < 0.0) throw DomainError("reduced_order_from_shares: epsilon must be >= 0");
    double acc = 0.0;
    for (std::size_t k = 0; k < order_shares.size(); ++k) {
        acc += order_shares[k];
        if (acc >= 1.0 - epsilon) return static_cast<int>(k + 1);
    }
    return static_cast<int>(order_shares.size());
}

inline LevelSetQuery level_set_query_from_name(const std::string& s) {
    if (s == "T_eps") return LevelSetQuery::TotalEps;
    if (s == "R_eps") return LevelSetQuery::RelativeEps;
    if (s == "I_eps") return LevelSetQuery::IndividualEps;
    if (s == "X_eps") return LevelSetQuery::InteractionEps;
    if (s == "P_eps") return LevelSetQuery::ProfileEps;
    if (s == "reduced_order") return LevelSetQuery::ReducedOrder;
    throw InputError("unknown level-set query: " + s);
}

// Aligned plain-text table: Subspace, Variables, Sa, Sb, S, T, R. Interaction
// rows leave the per-variable columns blank; totals close the table.
inline std::string report_table(const SensitivityReport& report,
                                const std::vector<std::string>& names = {}, double epsilon = 0.0) {
    std::ostringstream os;
    os << std::left << std::setw(12) << "Subspace" << std::setw(28) << "Variables" << std::right
       << std::setw(10) << "Sa" << std::setw(10) << "Sb" << std::setw(10) << "S" << std::setw(10)
       << "T" << std::setw(10) << "R" << "\n";
    auto fmt = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(4) << v;
        return s.str();
    };
    double sa = 0, sb = 0, so = 0;
    for (const auto& [u, t] : report.per_subset) {
        sa += t.structural;
        sb += t.correlative;
        so += t.overall;
        if (std::abs(t.overall) < epsilon) continue;
        std::string vars;
        for (int i : u.indices()) {
            if (!vars.empty()) vars += ",";
            vars += (static_cast<std::size_t>(i) < names.size()) ? names[static_cast<std::size_t>(i)]
                                                                 : ("x" + std::to_string(i + 1));
        }
        os << std::left << std::setw(12) << u.label() << std::setw(28) << vars << std::right
           << std::setw(10) << fmt(t.structural) << std::setw(10) << fmt(t.correlative)
           << std::setw(10) << fmt(t.overall);
        if (u.size() == 1) {
            int var = u.indices()[0];
            os << std::setw(10) << fmt(report.total.at(var)) << std::setw(10)
               << fmt(report.relative.at(var));
        } else {
            os << std::setw(10) << "-" << std::setw(10) << "-";
        }
        os << "\n";
    }
    double tsum = 0, rsum = 0;
    for (const auto& [i, t] : report.total) tsum += t;
    for (const auto& [i, r] : report.relative) rsum += r;
    os << std::left << std::setw(12) << "(total)" << std::setw(28) << "" << std::right
       << std::setw(10) << fmt(sa) << std::setw(10) << fmt(sb) << std::setw(10) << fmt(so)
       << std::setw(10) << fmt(tsum) << std::setw(10) << fmt(rsum) << "\n";
    return os.str();
}

}  // namespace hdmr
