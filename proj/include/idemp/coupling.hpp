/*
 * Copyright 2026 The idemp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

/**
 * @file coupling.hpp
 * @brief Couplings of two finitely supported idempotent measures.
 *
 * A coupling xi of (mu1, mu2) is an idempotent measure on X x X whose
 * coordinate images are mu1 and mu2. For finite supports that is a sparse
 * table gamma_{jk} over atom index pairs with
 *
 *   gamma_{jk} <= min(lambda1_j, lambda2_k),
 *   max_k gamma_{jk} = lambda1_j  for every row j,
 *   max_j gamma_{jk} = lambda2_k  for every column k.
 *
 * Indices j, k are positions in the canonical atom order of mu1, mu2.
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "idemp/error.hpp"
#include "idemp/measure.hpp"

namespace idemp {

/// Absolute tolerance for marginal equalities.
inline constexpr double kMarginalTolerance = 1e-9;

/// Default and hard limits on n1 * n2 for exhaustive support enumeration.
inline constexpr std::size_t kOracleMaxPairs = 20;
inline constexpr std::size_t kOracleHardLimit = 24;

struct AtomPair {
    std::size_t j = 0;
    std::size_t k = 0;

    friend constexpr auto operator<=>(const AtomPair&, const AtomPair&) = default;
};

using SupportSet = std::vector<AtomPair>;

class Coupling {
public:
    Coupling(IdempotentMeasure mu1, IdempotentMeasure mu2) : mu1_(std::move(mu1)), mu2_(std::move(mu2)) {
        if (!same_space(mu1_.space_ptr(), mu2_.space_ptr())) {
            throw Error(ErrorKind::space_mismatch, "coupled measures live on different spaces");
        }
    }

    const IdempotentMeasure& mu1() const noexcept { return mu1_; }
    const IdempotentMeasure& mu2() const noexcept { return mu2_; }
    const std::map<AtomPair, double>& entries() const noexcept { return entries_; }

    /// Sets gamma_{jk}; bottom removes the pair from the support.
    void set(AtomPair p, MaxPlus gamma) {
        if (p.j >= mu1_.size() || p.k >= mu2_.size()) {
            throw Error(ErrorKind::invalid_argument, "coupling index out of range");
        }
        if (gamma.is_bottom()) {
            entries_.erase(p);
        } else {
            entries_[p] = gamma.value();
        }
    }

    /// Joins an entry by max, i.e. xi (+) gamma (.) delta_{(x_j, y_k)}.
    void join(AtomPair p, double gamma) {
        auto it = entries_.find(p);
        if (it == entries_.end()) {
            set(p, MaxPlus(gamma));
        } else {
            it->second = std::max(it->second, gamma);
        }
    }

    MaxPlus gamma(AtomPair p) const {
        auto it = entries_.find(p);
        return it == entries_.end() ? MaxPlus::bottom() : MaxPlus(it->second);
    }

    SupportSet support() const {
        SupportSet s;
        s.reserve(entries_.size());
        for (const auto& [p, g] : entries_) s.push_back(p);
        return s;
    }

    friend bool operator==(const Coupling& a, const Coupling& b) {
        return a.mu1_ == b.mu1_ && a.mu2_ == b.mu2_ && a.entries_ == b.entries_;
    }

private:
    IdempotentMeasure mu1_;
    IdempotentMeasure mu2_;
    std::map<AtomPair, double> entries_;
};

struct MarginalReport {
    bool ok = false;
    std::vector<double> row_residual;   ///< |max_k gamma_jk - lambda1_j|, +inf for an empty row
    std::vector<double> column_residual;
    double worst = 0.0;
    SupportSet bound_violations;         ///< pairs with gamma > min(lambda1_j, lambda2_k)
    bool top_is_zero = false;
};

inline MarginalReport check_marginals(const Coupling& xi) {
    const auto& mu1 = xi.mu1();
    const auto& mu2 = xi.mu2();
    MarginalReport r;
    std::vector<double> row_max(mu1.size(), -HUGE_VAL);
    std::vector<double> col_max(mu2.size(), -HUGE_VAL);
    double top = -HUGE_VAL;
    for (const auto& [p, g] : xi.entries()) {
        row_max[p.j] = std::max(row_max[p.j], g);
        col_max[p.k] = std::max(col_max[p.k], g);
        top = std::max(top, g);
        if (g > std::min(mu1[p.j].weight, mu2[p.k].weight) + kMarginalTolerance) r.bound_violations.push_back(p);
    }
    auto residual = [](double got, double want) {
        return std::isinf(got) ? HUGE_VAL : std::abs(got - want);
    };
    for (std::size_t j = 0; j < mu1.size(); ++j) r.row_residual.push_back(residual(row_max[j], mu1[j].weight));
    for (std::size_t k = 0; k < mu2.size(); ++k) r.column_residual.push_back(residual(col_max[k], mu2[k].weight));
    for (double v : r.row_residual) r.worst = std::max(r.worst, v);
    for (double v : r.column_residual) r.worst = std::max(r.worst, v);
    r.top_is_zero = !std::isinf(top) && std::abs(top) <= kMarginalTolerance;
    r.ok = r.worst <= kMarginalTolerance && r.bound_violations.empty() && r.top_is_zero;
    return r;
}

/// True iff projecting the support onto each coordinate hits every atom.
inline bool projections_cover(const Coupling& xi) {
    std::vector<bool> rows(xi.mu1().size(), false), cols(xi.mu2().size(), false);
    for (const auto& [p, g] : xi.entries()) {
        rows[p.j] = true;
        cols[p.k] = true;
    }
    return std::all_of(rows.begin(), rows.end(), [](bool b) { return b; }) &&
           std::all_of(cols.begin(), cols.end(), [](bool b) { return b; });
}

namespace detail {

/// Position of the zero-weight atom with the smallest point id. Atoms are
/// id-sorted, so that is the first zero.
inline std::size_t first_zero_atom(const IdempotentMeasure& mu) {
    for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu[i].weight == 0.0) return i;
    }
    throw Error(ErrorKind::normalization, "measure has no weight-0 atom");
}

} // namespace detail

/// The canonical coupling: with j*, k* the first weight-0 atoms,
/// gamma(j*, k*) = 0, gamma(j*, k) = lambda2_k, gamma(j, k*) = lambda1_j.
inline Coupling xi0(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2) {
    Coupling xi(mu1, mu2);
    const std::size_t js = detail::first_zero_atom(mu1);
    const std::size_t ks = detail::first_zero_atom(mu2);
    xi.set({js, ks}, MaxPlus::unit());
    for (std::size_t k = 0; k < mu2.size(); ++k) {
        if (k != ks) xi.set({js, k}, MaxPlus(mu2[k].weight));
    }
    for (std::size_t j = 0; j < mu1.size(); ++j) {
        if (j != js) xi.set({j, ks}, MaxPlus(mu1[j].weight));
    }
    return xi;
}

/// Coupling with gamma at the min-bound on every pair of `support`.
inline Coupling coupling_from_support(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2,
                                      const SupportSet& support) {
    Coupling xi(mu1, mu2);
    for (const auto& p : support) xi.set(p, MaxPlus(std::min(mu1[p.j].weight, mu2[p.k].weight)));
    return xi;
}

/// xi0 joined with a random R-part: a random K x M over the non-anchor
/// indices with gamma_{km} <= min(lambda1_k, lambda2_m).
inline Coupling random_member(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2, std::uint64_t seed) {
    Coupling xi = xi0(mu1, mu2);
    const std::size_t js = detail::first_zero_atom(mu1);
    const std::size_t ks = detail::first_zero_atom(mu2);

    std::mt19937_64 rng(seed);
    // 53-bit uniform in [0, 1); independent of the standard library's distributions.
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    std::vector<std::size_t> rows, cols;
    for (std::size_t j = 0; j < mu1.size(); ++j) {
        if (j != js && unit() < 0.5) rows.push_back(j);
    }
    for (std::size_t k = 0; k < mu2.size(); ++k) {
        if (k != ks && unit() < 0.5) cols.push_back(k);
    }
    for (std::size_t j : rows) {
        for (std::size_t k : cols) {
            const double bound = std::min(mu1[j].weight, mu2[k].weight);
            // A quarter of the entries sit exactly at the bound.
            const double gamma = unit() < 0.25 ? bound : bound - 3.0 * unit();
            xi.join({j, k}, gamma);
        }
    }
    return xi;
}

/// Support-level composition: (k, l) is kept iff some middle atom m links
/// (k, m) in xi12 and (m, l) in xi23. Weights sit at the min-bound
/// min(lambda1_k, lambda3_l), which keeps both marginal families exact.
inline Coupling compose(const Coupling& xi12, const Coupling& xi23) {
    if (!(xi12.mu2() == xi23.mu1())) {
        throw Error(ErrorKind::invalid_argument, "compose: middle measures differ");
    }
    const auto& mu1 = xi12.mu1();
    const auto& mu3 = xi23.mu2();
    const std::size_t n2 = xi12.mu2().size();
    std::vector<std::vector<std::size_t>> left(n2), right(n2);
    for (const auto& [p, g] : xi12.entries()) left[p.k].push_back(p.j);
    for (const auto& [p, g] : xi23.entries()) right[p.j].push_back(p.k);

    Coupling out(mu1, mu3);
    for (std::size_t m = 0; m < n2; ++m) {
        for (std::size_t k : left[m]) {
            for (std::size_t l : right[m]) out.set({k, l}, MaxPlus(std::min(mu1[k].weight, mu3[l].weight)));
        }
    }
    return out;
}

/**
 * Exhaustive enumeration of marginal-feasible supports.
 *
 * Walks every nonempty S in [n1] x [n2] (as a bitmask over row-major pairs)
 * and yields those for which gamma = min-bound on S satisfies both marginal
 * families within kMarginalTolerance. Feasibility is tested directly from
 * the marginal definitions, without any shortcut, so the range can serve as
 * an oracle substrate.
 */
class FeasibleSupports {
public:
    FeasibleSupports(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2,
                     std::size_t max_pairs = kOracleMaxPairs)
        : n1_(mu1.size()), n2_(mu2.size()) {
        if (max_pairs > kOracleHardLimit) {
            throw Error(ErrorKind::invalid_argument,
                        "support enumeration limit may not exceed " + std::to_string(kOracleHardLimit));
        }
        if (!same_space(mu1.space_ptr(), mu2.space_ptr())) {
            throw Error(ErrorKind::space_mismatch, "measures live on different spaces");
        }
        if (n1_ * n2_ > max_pairs) {
            throw Error(ErrorKind::guard_exceeded, std::to_string(n1_) + "x" + std::to_string(n2_) +
                                                       " pairs exceed the enumeration limit of " +
                                                       std::to_string(max_pairs));
        }
        for (std::size_t j = 0; j < n1_; ++j) lambda1_.push_back(mu1[j].weight);
        for (std::size_t k = 0; k < n2_; ++k) lambda2_.push_back(mu2[k].weight);
        for (std::size_t j = 0; j < n1_; ++j) {
            for (std::size_t k = 0; k < n2_; ++k) bound_.push_back(std::min(lambda1_[j], lambda2_[k]));
        }
    }

    std::size_t pair_count() const noexcept { return n1_ * n2_; }

    /// Pair index p <-> (p / n2, p % n2).
    AtomPair pair(std::size_t p) const noexcept { return {p / n2_, p % n2_}; }

    bool feasible(std::uint32_t mask) const {
        if (mask == 0) return false;
        double rows[kOracleHardLimit];
        double cols[kOracleHardLimit];
        std::fill_n(rows, n1_, -HUGE_VAL);
        std::fill_n(cols, n2_, -HUGE_VAL);
        for (std::uint32_t m = mask; m != 0; m &= m - 1) {
            const auto p = static_cast<std::size_t>(std::countr_zero(m));
            const std::size_t j = p / n2_, k = p % n2_;
            rows[j] = std::max(rows[j], bound_[p]);
            cols[k] = std::max(cols[k], bound_[p]);
        }
        for (std::size_t j = 0; j < n1_; ++j) {
            if (std::isinf(rows[j]) || std::abs(rows[j] - lambda1_[j]) > kMarginalTolerance) return false;
        }
        for (std::size_t k = 0; k < n2_; ++k) {
            if (std::isinf(cols[k]) || std::abs(cols[k] - lambda2_[k]) > kMarginalTolerance) return false;
        }
        return true;
    }

    SupportSet to_support(std::uint32_t mask) const {
        SupportSet s;
        for (std::uint32_t m = mask; m != 0; m &= m - 1) s.push_back(pair(static_cast<std::size_t>(std::countr_zero(m))));
        return s;
    }

    /// Calls visit(mask) for every feasible support mask, in increasing order.
    template <class Visit>
    void for_each_mask(Visit&& visit) const {
        const std::uint64_t end = std::uint64_t{1} << pair_count();
        for (std::uint64_t m = 1; m < end; ++m) {
            const auto mask = static_cast<std::uint32_t>(m);
            if (feasible(mask)) visit(mask);
        }
    }

    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = SupportSet;
        using difference_type = std::ptrdiff_t;
        using pointer = const SupportSet*;
        using reference = const SupportSet&;

        iterator() = default;
        iterator(const FeasibleSupports* owner, std::uint64_t mask) : owner_(owner), mask_(mask) { settle(); }

        reference operator*() const { return current_; }
        pointer operator->() const { return &current_; }
        iterator& operator++() {
            ++mask_;
            settle();
            return *this;
        }
        void operator++(int) { ++*this; }
        friend bool operator==(const iterator& a, const iterator& b) { return a.mask_ == b.mask_; }

        std::uint32_t mask() const noexcept { return static_cast<std::uint32_t>(mask_); }

    private:
        void settle() {
            if (!owner_) return;
            const std::uint64_t end = owner_->end_mask();
            while (mask_ < end && !owner_->feasible(static_cast<std::uint32_t>(mask_))) ++mask_;
            if (mask_ < end) current_ = owner_->to_support(static_cast<std::uint32_t>(mask_));
        }

        const FeasibleSupports* owner_ = nullptr;
        std::uint64_t mask_ = 0;
        SupportSet current_;
    };

    iterator begin() const { return iterator(this, 1); }
    iterator end() const { return iterator(this, end_mask()); }

private:
    std::uint64_t end_mask() const noexcept { return std::uint64_t{1} << pair_count(); }

    std::size_t n1_, n2_;
    std::vector<double> lambda1_, lambda2_, bound_;
};

inline FeasibleSupports enumerate_feasible_supports(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2,
                                                    std::size_t max_pairs = kOracleMaxPairs) {
    return FeasibleSupports(mu1, mu2, max_pairs);
}

} // namespace idemp
