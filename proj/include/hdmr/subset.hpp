#pragma once

#include "hdmr/common.hpp"

#include <algorithm>
#include <sstream>
#include <vector>

namespace hdmr {

// Subset of variable indices, 0-based, strictly increasing. The empty subset
// stands for the constant subspace. Printed 1-based to match report tables.
class VariableSubset {
  public:
    VariableSubset() = default;

    explicit VariableSubset(std::vector<int> indices) : indices_(std::move(indices)) {
        for (std::size_t i = 0; i < indices_.size(); ++i) {
            if (indices_[i] < 0) throw InputError("VariableSubset: negative index");
            if (i > 0 && indices_[i] <= indices_[i - 1])
                throw InputError("VariableSubset: indices must be strictly increasing");
        }
    }

    static VariableSubset empty() { return VariableSubset(); }
    static VariableSubset single(int i) { return VariableSubset({i}); }

    const std::vector<int>& indices() const { return indices_; }
    int size() const { return static_cast<int>(indices_.size()); }
    bool is_empty() const { return indices_.empty(); }

    bool contains(int var) const {
        return std::binary_search(indices_.begin(), indices_.end(), var);
    }

    bool subset_of(const VariableSubset& other) const {
        return std::includes(other.indices_.begin(), other.indices_.end(),
                             indices_.begin(), indices_.end());
    }

    bool strict_subset_of(const VariableSubset& other) const {
        return size() < other.size() && subset_of(other);
    }

    // Gather the coordinates of this subset out of a full point.
    Vector gather(const Vector& x) const {
        Vector out(size());
        for (int i = 0; i < size(); ++i) out[i] = x[indices_[static_cast<std::size_t>(i)]];
        return out;
    }

    std::string label() const {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < indices_.size(); ++i) {
            if (i > 0) os << ",";
            os << indices_[i] + 1;
        }
        if (indices_.size() == 1) os << ",";
        os << ")";
        return os.str();
    }

    bool operator==(const VariableSubset& o) const { return indices_ == o.indices_; }
    bool operator!=(const VariableSubset& o) const { return indices_ != o.indices_; }

    // Graded lexicographic: by size, then lexicographic. Determines block
    // order everywhere (feature matrices, covariance tables, reports).
    bool operator<(const VariableSubset& o) const {
        if (indices_.size() != o.indices_.size()) return indices_.size() < o.indices_.size();
        return indices_ < o.indices_;
    }

  private:
    std::vector<int> indices_;
};

// All subsets of {0..n-1} with size <= max_order, graded-lex order, empty first.
inline std::vector<VariableSubset> subsets_up_to_order(int n, int max_order) {
    if (n < 0) throw InputError("subsets_up_to_order: n < 0");
    std::vector<VariableSubset> out;
    out.push_back(VariableSubset::empty());
    std::vector<int> cur;
    for (int k = 1; k <= std::min(n, max_order); ++k) {
        cur.assign(static_cast<std::size_t>(k), 0);
        for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
        while (true) {
            out.push_back(VariableSubset(cur));
            int i = k - 1;
            while (i >= 0 && cur[static_cast<std::size_t>(i)] == n - k + i) --i;
            if (i < 0) break;
            ++cur[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j)
                cur[static_cast<std::size_t>(j)] = cur[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return out;
}

// All subsets of the given subset (the power set), graded-lex, empty first.
inline std::vector<VariableSubset> power_set(const VariableSubset& u) {
    const auto& idx = u.indices();
    int k = u.size();
    std::vector<VariableSubset> out;
    for (int size = 0; size <= k; ++size) {
        std::vector<int> pick(static_cast<std::size_t>(size));
        std::function<void(int, int)> rec = [&](int start, int depth) {
            if (depth == size) {
                out.push_back(VariableSubset(pick));
                return;
            }
            for (int i = start; i < k; ++i) {
                pick[static_cast<std::size_t>(depth)] = idx[static_cast<std::size_t>(i)];
                rec(i + 1, depth + 1);
            }
        };
        rec(0, 0);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace hdmr
