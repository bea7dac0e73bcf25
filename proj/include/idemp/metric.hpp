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
 * @file metric.hpp
 * @brief The idempotent Kantorovich distance on finitely supported measures.
 *
 * Pair cost       c_{jk} = |lambda2_k - lambda1_j| + rho(x1_j, x2_k)
 * Distance        H(mu1, mu2) = min over couplings xi of max_{(j,k) in supp xi} c_{jk}
 * Truncated       rho_omega = min(diam X, H)
 *
 * The objective only sees the support of xi, and a support is feasible iff
 * every row j holds a pair with lambda2_k >= lambda1_j and every column k a
 * pair with lambda1_j >= lambda2_k. Each row and column can therefore take
 * its cheapest admissible pair independently:
 *
 *   H = max( max_j min{c_jk : lambda2_k >= lambda1_j},
 *            max_k min{c_jk : lambda1_j >= lambda2_k} ).
 *
 * `distance` evaluates this closed form; `distance_bruteforce` enumerates
 * feasible supports and is kept as the oracle.
 */

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "idemp/coupling.hpp"
#include "idemp/error.hpp"
#include "idemp/measure.hpp"
#include "idemp/space.hpp"

namespace idemp {

class CostMatrix {
public:
    CostMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t j, std::size_t k) const { return data_[j * cols_ + k]; }
    double& operator()(std::size_t j, std::size_t k) { return data_[j * cols_ + k]; }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

inline void require_same_space(const IdempotentMeasure& a, const IdempotentMeasure& b) {
    if (!same_space(a.space_ptr(), b.space_ptr())) {
        throw Error(ErrorKind::space_mismatch, "measures live on different ground spaces");
    }
}

inline CostMatrix cost_matrix(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2) {
    require_same_space(mu1, mu2);
    const auto& space = mu1.space();
    CostMatrix c(mu1.size(), mu2.size());
    for (std::size_t j = 0; j < mu1.size(); ++j) {
        for (std::size_t k = 0; k < mu2.size(); ++k) {
            c(j, k) = std::abs(mu2[k].weight - mu1[j].weight) + space.distance(mu1[j].point, mu2[k].point);
        }
    }
    return c;
}

struct DistanceReport {
    double H = 0.0;
    double rho_omega = 0.0;
    SupportSet support;  ///< a marginal-feasible support whose max cost is H
    bool truncated = false;
};

namespace detail {

inline DistanceReport finish_report(const IdempotentMeasure& mu1, double h, SupportSet support) {
    DistanceReport r;
    r.H = h;
    const double d = diam(mu1.space());
    r.rho_omega = std::min(d, h);
    r.truncated = d < h;
    r.support = std::move(support);
    return r;
}

} // namespace detail

/// Closed-form solver. Row and column minima break ties on the smallest index,
/// so the reported support is the lexicographically smallest choice.
inline DistanceReport distance(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2,
                               const CostMatrix& c) {
    require_same_space(mu1, mu2);
    const std::size_t n1 = mu1.size(), n2 = mu2.size();
    double h = 0.0;
    SupportSet support;
    for (std::size_t j = 0; j < n1; ++j) {
        std::size_t best = n2;
        for (std::size_t k = 0; k < n2; ++k) {
            if (mu2[k].weight >= mu1[j].weight && (best == n2 || c(j, k) < c(j, best))) best = k;
        }
        // A weight-0 atom in mu2 always qualifies.
        h = std::max(h, c(j, best));
        support.push_back({j, best});
    }
    for (std::size_t k = 0; k < n2; ++k) {
        std::size_t best = n1;
        for (std::size_t j = 0; j < n1; ++j) {
            if (mu1[j].weight >= mu2[k].weight && (best == n1 || c(j, k) < c(best, k))) best = j;
        }
        h = std::max(h, c(best, k));
        support.push_back({best, k});
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());
    return detail::finish_report(mu1, h, std::move(support));
}

inline DistanceReport distance(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2) {
    return distance(mu1, mu2, cost_matrix(mu1, mu2));
}

/// Oracle: minimum over every feasible support of its max pair cost.
/// The first minimizing support in enumeration order is reported.
inline DistanceReport distance_bruteforce(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2,
                                          const CostMatrix& c, std::size_t max_pairs = kOracleMaxPairs) {
    const FeasibleSupports supports(mu1, mu2, max_pairs);
    std::vector<double> pair_cost(supports.pair_count());
    for (std::size_t p = 0; p < pair_cost.size(); ++p) {
        const AtomPair ab = supports.pair(p);
        pair_cost[p] = c(ab.j, ab.k);
    }
    double best = HUGE_VAL;
    std::uint32_t best_mask = 0;
    supports.for_each_mask([&](std::uint32_t mask) {
        double cost = 0.0;
        for (std::uint32_t m = mask; m != 0; m &= m - 1) {
            cost = std::max(cost, pair_cost[static_cast<std::size_t>(std::countr_zero(m))]);
        }
        if (cost < best) {
            best = cost;
            best_mask = mask;
        }
    });
    if (best_mask == 0) throw Error(ErrorKind::normalization, "no feasible coupling support");
    return detail::finish_report(mu1, best, supports.to_support(best_mask));
}

inline DistanceReport distance_bruteforce(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2,
                                          std::size_t max_pairs = kOracleMaxPairs) {
    return distance_bruteforce(mu1, mu2, cost_matrix(mu1, mu2), max_pairs);
}

/// min(diam X, H).
inline double rho_omega(const IdempotentMeasure& mu1, const IdempotentMeasure& mu2) {
    return distance(mu1, mu2).rho_omega;
}

struct LimitEstimate {
    double value = 0.0;
    bool converged = false;
    std::vector<double> trajectory;
};

/// Tracks rho_omega(mu_t, nu_t) along paired sequences (common prefix).
/// Converged when the last three successive differences are all within tol.
inline LimitEstimate rho_I_estimate(std::span<const IdempotentMeasure> mus, std::span<const IdempotentMeasure> nus,
                                    double tol) {
    if (mus.empty() || nus.empty()) throw Error(ErrorKind::invalid_argument, "empty measure sequence");
    const std::size_t n = std::min(mus.size(), nus.size());
    LimitEstimate est;
    est.trajectory.reserve(n);
    for (std::size_t t = 0; t < n; ++t) est.trajectory.push_back(rho_omega(mus[t], nus[t]));
    est.value = est.trajectory.back();
    est.converged = true;
    const std::size_t first = n > 3 ? n - 3 : 1;
    for (std::size_t t = first; t < n; ++t) {
        if (std::abs(est.trajectory[t] - est.trajectory[t - 1]) > tol) est.converged = false;
    }
    return est;
}

class DistanceMatrix {
public:
    explicit DistanceMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

    std::size_t size() const noexcept { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

    friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

private:
    std::size_t n_;
    std::vector<double> data_;
};

/// Pairwise rho_omega. Upper-triangle rows are split over `threads` workers;
/// every entry is written by exactly one worker, so the result does not
/// depend on the thread count.
inline DistanceMatrix gram(std::span<const IdempotentMeasure> measures, unsigned threads = 1) {
    const std::size_t n = measures.size();
    for (std::size_t i = 1; i < n; ++i) require_same_space(measures[0], measures[i]);
    DistanceMatrix g(n);
    auto work = [&](std::size_t worker, std::size_t stride) {
        for (std::size_t i = worker; i < n; i += stride) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = rho_omega(measures[i], measures[j]);
                g(i, j) = d;
                g(j, i) = d;
            }
        }
    };
    const std::size_t stride = std::max<std::size_t>(1, std::min<std::size_t>(threads, n));
    if (stride == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < stride; ++w) pool.emplace_back(work, w, stride);
    }
    return g;
}

} // namespace idemp
