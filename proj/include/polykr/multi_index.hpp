#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace polykr {

namespace detail {

inline bool lex_less(std::span<const int> a, std::span<const int> b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline bool spans_equal(std::span<const int> a, std::span<const int> b) {
    return std::equal(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

// A finite multi-index set, stored flat row-major in lexicographic order
// with stable integer ids (the row positions). When built from weights and
// a level it is the anisotropic set { nu : nu . k < level } and keeps that
// metadata for serialization.
class MultiIndexSet {
public:
    MultiIndexSet() = default;

    static MultiIndexSet from_rows(int dim, std::vector<std::vector<int>> rows) {
        if (dim < 1) throw std::invalid_argument("MultiIndexSet: dimension must be >= 1");
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        MultiIndexSet set;
        set.dim_ = dim;
        set.flat_.reserve(rows.size() * dim);
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != dim)
                throw std::invalid_argument("MultiIndexSet: inconsistent row length");
            for (int v : row) {
                if (v < 0) throw std::invalid_argument("MultiIndexSet: negative entry");
                set.flat_.push_back(v);
            }
        }
        return set;
    }

    int dimension() const { return dim_; }
    std::size_t size() const { return dim_ ? flat_.size() / dim_ : 0; }
    bool empty() const { return flat_.empty(); }

    std::span<const int> operator[](std::size_t i) const {
        return {flat_.data() + i * dim_, static_cast<std::size_t>(dim_)};
    }

    std::span<const int> flat() const { return flat_; }

    // Row id of an index, or -1 if absent. Binary search over the sorted rows.
    std::ptrdiff_t find(std::span<const int> idx) const {
        std::size_t lo = 0, hi = size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (detail::lex_less((*this)[mid], idx))
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo < size() && detail::spans_equal((*this)[lo], idx))
            return static_cast<std::ptrdiff_t>(lo);
        return -1;
    }

    bool contains(std::span<const int> idx) const { return find(idx) >= 0; }

    int max_degree(int axis) const {
        int m = 0;
        for (std::size_t i = 0; i < size(); ++i) m = std::max(m, (*this)[i][axis]);
        return m;
    }

    int max_degree() const {
        int m = 0;
        for (int v : flat_) m = std::max(m, v);
        return m;
    }

    bool has_weights() const { return !weights_.empty(); }
    const std::vector<double>& weights() const { return weights_; }
    std::optional<double> level() const { return level_; }

    void set_anisotropic_meta(std::vector<double> weights, double level) {
        weights_ = std::move(weights);
        level_ = level;
    }

private:
    int dim_ = 0;
    std::vector<int> flat_;
    std::vector<double> weights_;
    std::optional<double> level_;
};

// { nu in N_0^d : nu . k < level }, built by recursion over the dimensions.
// The per-coordinate bound is floor(budget / k_j), reduced by one when the
// ratio is an exact integer (the inequality is strict). Emits rows in
// lexicographic order directly; cost O(|Lambda| * d).
inline MultiIndexSet construct_anisotropic(const std::vector<double>& weights,
                                           double level,
                                           std::size_t* recursion_calls = nullptr) {
    if (weights.empty()) throw std::invalid_argument("construct_anisotropic: empty weights");
    for (double k : weights)
        if (!(k > 0.0)) throw std::invalid_argument("construct_anisotropic: weights must be positive");
    if (!(level > 0.0)) throw std::invalid_argument("construct_anisotropic: level must be positive");

    const int d = static_cast<int>(weights.size());
    std::vector<int> flat;
    std::vector<int> current(d, 0);
    std::size_t calls = 0;

    auto recurse = [&](auto&& self, int axis, double budget) -> void {
        ++calls;
        if (axis == d) {
            flat.insert(flat.end(), current.begin(), current.end());
            return;
        }
        const double ratio = budget / weights[axis];
        long bound = static_cast<long>(std::floor(ratio));
        if (static_cast<double>(bound) == ratio) --bound;
        for (long i = 0; i <= bound; ++i) {
            current[axis] = static_cast<int>(i);
            self(self, axis + 1, budget - static_cast<double>(i) * weights[axis]);
        }
        current[axis] = 0;
    };
    recurse(recurse, 0, level);
    if (recursion_calls) *recursion_calls = calls;

    // rows come out of the recursion lexicographically sorted and unique
    std::vector<std::vector<int>> rows(flat.size() / d);
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i].assign(flat.begin() + static_cast<std::ptrdiff_t>(i) * d,
                       flat.begin() + static_cast<std::ptrdiff_t>(i + 1) * d);
    MultiIndexSet set = MultiIndexSet::from_rows(d, std::move(rows));
    set.set_anisotropic_meta(weights, level);
    return set;
}

// { nu : ||nu||_1 <= total_degree } via unit weights and a half-offset level.
inline MultiIndexSet total_degree_set(int dim, int total_degree) {
    if (total_degree < 0) throw std::invalid_argument("total_degree_set: negative degree");
    return construct_anisotropic(std::vector<double>(dim, 1.0),
                                 static_cast<double>(total_degree) + 0.5);
}

// Full tensor box { mu : mu_j <= degrees_j }.
inline MultiIndexSet full_box(std::span<const int> degrees) {
    const int d = static_cast<int>(degrees.size());
    if (d < 1) throw std::invalid_argument("full_box: empty degrees");
    std::size_t total = 1;
    for (int deg : degrees) {
        if (deg < 0) throw std::invalid_argument("full_box: negative degree");
        total *= static_cast<std::size_t>(deg) + 1;
    }
    std::vector<std::vector<int>> rows;
    rows.reserve(total);
    std::vector<int> current(d, 0);
    for (std::size_t r = 0; r < total; ++r) {
        rows.push_back(current);
        for (int j = d - 1; j >= 0; --j) {
            if (current[j] < degrees[j]) {
                ++current[j];
                break;
            }
            current[j] = 0;
        }
    }
    return MultiIndexSet::from_rows(d, std::move(rows));
}

inline bool is_downward_closed(const MultiIndexSet& set) {
    std::vector<int> probe(set.dimension());
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto row = set[i];
        std::copy(row.begin(), row.end(), probe.begin());
        for (int j = 0; j < set.dimension(); ++j) {
            if (row[j] == 0) continue;
            probe[j] = row[j] - 1;
            if (!set.contains(probe)) return false;
            probe[j] = row[j];
        }
    }
    return true;
}

// Tail structure for the fast transport evaluator. Level j holds the unique
// tails nu_{[j:]} (0-based; level 0 is the full set, level d the empty
// tail). Groups at step j partition level-j tails by their level-(j+1)
// parent; members differ only in coordinate j.
struct TailPartition {
    struct Group {
        int parent = 0;             // tail id in level j+1
        std::vector<int> degrees;   // coordinate-j values, ascending
        std::vector<int> members;   // tail ids in level j
    };

    int dim = 0;
    std::vector<std::size_t> level_sizes;   // level_sizes[j] = |Lambda_{[j:]}|, j = 0..dim
    std::vector<std::vector<Group>> groups; // groups[j], j = 0..dim-1

    std::size_t stored_items() const {
        std::size_t total = 0;
        for (std::size_t j = 0; j < level_sizes.size() - 1; ++j) total += level_sizes[j];
        return total;
    }
};

inline TailPartition build_tail_partition(const MultiIndexSet& lambda) {
    if (lambda.empty()) throw std::invalid_argument("build_tail_partition: empty set");
    if (!is_downward_closed(lambda))
        throw std::invalid_argument("build_tail_partition: set is not downward closed");

    const int d = lambda.dimension();
    const std::size_t m = lambda.size();

    // levels[j]: sorted unique tails of length d-j
    std::vector<std::vector<std::vector<int>>> levels(d + 1);
    levels[0].reserve(m);
    for (std::size_t i = 0; i < m; ++i)
        levels[0].emplace_back(lambda[i].begin(), lambda[i].end());
    for (int j = 1; j <= d; ++j) {
        auto& prev = levels[j - 1];
        auto& cur = levels[j];
        cur.reserve(prev.size());
        for (const auto& tail : prev)
            cur.emplace_back(tail.begin() + 1, tail.end());
        std::sort(cur.begin(), cur.end());
        cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
    }

    auto locate = [](const std::vector<std::vector<int>>& list,
                     const std::vector<int>& key) -> int {
        const auto it = std::lower_bound(list.begin(), list.end(), key);
        return static_cast<int>(it - list.begin());
    };

    TailPartition part;
    part.dim = d;
    part.level_sizes.resize(d + 1);
    for (int j = 0; j <= d; ++j) part.level_sizes[j] = levels[j].size();
    part.groups.resize(d);

    for (int j = 0; j < d; ++j) {
        const auto& tails = levels[j];
        struct Entry {
            int parent;
            int degree;
            int member;
        };
        std::vector<Entry> entries;
        entries.reserve(tails.size());
        for (std::size_t t = 0; t < tails.size(); ++t) {
            std::vector<int> suffix(tails[t].begin() + 1, tails[t].end());
            entries.push_back({locate(levels[j + 1], suffix), tails[t][0],
                               static_cast<int>(t)});
        }
        std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
            return a.parent != b.parent ? a.parent < b.parent : a.degree < b.degree;
        });
        auto& out = part.groups[j];
        for (const auto& e : entries) {
            if (out.empty() || out.back().parent != e.parent) {
                out.push_back({e.parent, {}, {}});
            }
            out.back().degrees.push_back(e.degree);
            out.back().members.push_back(e.member);
        }
    }
    return part;
}

}  // namespace polykr
