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
 * @file convergence.hpp
 * @brief Finite-tail convergence diagnostics for sequences of measures.
 *
 * Three verdicts on the tail of a sequence mu_t against a candidate limit mu:
 *
 *  - star_condition: atoms of mu are tracked by atoms of mu_t (positions
 *    within eps_x, weights within eps_weight), and conversely every atom of
 *    mu_t is tracked by an atom of mu;
 *  - converges_metric: rho_omega(mu_t, mu) <= eps;
 *  - converges_pointwise: |mu_t(phi) - mu(phi)| < eps over a test panel.
 *
 * Limits cannot be observed on finite data, so each verdict is a tolerance
 * test on the last `tail` elements. MatchedTolerances couples the three:
 * tracking within (eps_x, eps_weight) bounds every pair cost by
 * eps_x + eps_weight, and moves an L-Lipschitz panel function's integral by
 * at most eps_weight + L * eps_x.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "idemp/error.hpp"
#include "idemp/measure.hpp"
#include "idemp/metric.hpp"

namespace idemp {

inline constexpr double kDefaultTrackingEps = 1e-3;
inline constexpr double kDefaultTailFraction = 0.25;
/// Normalized residuals at or above this multiple of the tolerance count as a clear failure.
inline constexpr double kDecisiveMargin = 10.0;

class MeasureSequence {
public:
    explicit MeasureSequence(std::vector<IdempotentMeasure> measures) : measures_(std::move(measures)) {
        if (measures_.empty()) throw Error(ErrorKind::invalid_argument, "empty measure sequence");
        for (const auto& m : measures_) {
            if (!same_space(m.space_ptr(), measures_.front().space_ptr())) {
                throw Error(ErrorKind::space_mismatch, "sequence elements live on different spaces");
            }
        }
    }

    std::size_t size() const noexcept { return measures_.size(); }
    const IdempotentMeasure& operator[](std::size_t t) const { return measures_.at(t); }
    std::span<const IdempotentMeasure> measures() const noexcept { return measures_; }
    const SpacePtr& space_ptr() const noexcept { return measures_.front().space_ptr(); }

    /// Index of the first tail element for a tail of `tail` elements.
    std::size_t tail_begin(std::size_t tail) const {
        if (tail == 0 || tail > size()) {
            throw Error(ErrorKind::invalid_argument, "tail must be in [1, sequence length]");
        }
        return size() - tail;
    }

    /// The last quarter of the sequence, at least one element.
    std::size_t default_tail() const noexcept {
        const auto t = static_cast<std::size_t>(std::ceil(kDefaultTailFraction * static_cast<double>(size())));
        return std::max<std::size_t>(1, t);
    }

private:
    std::vector<IdempotentMeasure> measures_;
};

struct AtomTrack {
    PointRef point;
    double weight = 0.0;
    bool satisfied = true;
    std::vector<double> distance_residual;  ///< per tail step, of the best-matching atom
    std::vector<double> weight_residual;
};

struct StarReport {
    bool satisfied = false;
    bool forward_satisfied = false;   ///< every atom of the limit is tracked
    bool reverse_satisfied = false;   ///< every atom of the tail is tracked by the limit
    bool decisive = false;
    std::size_t tail_begin = 0;
    double worst_distance = 0.0;
    double worst_weight = 0.0;
    double worst_score = 0.0;         ///< max over all matches of max(d/eps_x, dw/eps_weight)
    std::vector<AtomTrack> atoms;
};

namespace detail {

struct Match {
    double distance = HUGE_VAL;
    double weight = HUGE_VAL;
    double score = HUGE_VAL;
};

inline Match best_match(const GroundSpace& space, const Atom& a, const IdempotentMeasure& other, double eps_x,
                        double eps_w) {
    Match best;
    for (const auto& b : other.atoms()) {
        const double d = space.distance(a.point, b.point);
        const double w = std::abs(a.weight - b.weight);
        const double s = std::max(d / eps_x, w / eps_w);
        if (s < best.score) best = {d, w, s};
    }
    return best;
}

inline void require_positive(double eps, const char* what) {
    if (!(eps > 0.0)) throw Error(ErrorKind::invalid_argument, std::string(what) + " must be positive");
}

} // namespace detail

inline StarReport star_condition(const MeasureSequence& seq, const IdempotentMeasure& limit,
                                 double eps_x = kDefaultTrackingEps, double eps_weight = kDefaultTrackingEps,
                                 std::optional<std::size_t> tail = std::nullopt) {
    detail::require_positive(eps_x, "eps_x");
    detail::require_positive(eps_weight, "eps_weight");
    if (!same_space(seq.space_ptr(), limit.space_ptr())) {
        throw Error(ErrorKind::space_mismatch, "limit and sequence live on different spaces");
    }
    const auto& space = limit.space();
    StarReport r;
    r.tail_begin = seq.tail_begin(tail.value_or(seq.default_tail()));
    r.forward_satisfied = true;
    r.reverse_satisfied = true;

    for (const auto& a : limit.atoms()) {
        AtomTrack track{a.point, a.weight, true, {}, {}};
        for (std::size_t t = r.tail_begin; t < seq.size(); ++t) {
            const auto m = detail::best_match(space, a, seq[t], eps_x, eps_weight);
            track.distance_residual.push_back(m.distance);
            track.weight_residual.push_back(m.weight);
            r.worst_distance = std::max(r.worst_distance, m.distance);
            r.worst_weight = std::max(r.worst_weight, m.weight);
            r.worst_score = std::max(r.worst_score, m.score);
            if (m.score > 1.0) track.satisfied = false;
        }
        r.forward_satisfied = r.forward_satisfied && track.satisfied;
        r.atoms.push_back(std::move(track));
    }
    for (std::size_t t = r.tail_begin; t < seq.size(); ++t) {
        for (const auto& b : seq[t].atoms()) {
            const auto m = detail::best_match(space, b, limit, eps_x, eps_weight);
            r.worst_score = std::max(r.worst_score, m.score);
            if (m.score > 1.0) r.reverse_satisfied = false;
        }
    }
    r.satisfied = r.forward_satisfied && r.reverse_satisfied;
    r.decisive = r.worst_score <= 1.0 || r.worst_score >= kDecisiveMargin;
    return r;
}

using Panel = std::vector<TestFunction>;

inline bool in_neighborhood(const IdempotentMeasure& nu, const IdempotentMeasure& mu, std::span<const TestFunction> panel,
                            double eps) {
    for (const auto& phi : panel) {
        if (!(std::abs(integrate(mu, phi) - integrate(nu, phi)) < eps)) return false;
    }
    return true;
}

inline bool converges_metric(const MeasureSequence& seq, const IdempotentMeasure& limit, double eps,
                             std::optional<std::size_t> tail = std::nullopt) {
    for (std::size_t t = seq.tail_begin(tail.value_or(seq.default_tail())); t < seq.size(); ++t) {
        if (rho_omega(seq[t], limit) > eps) return false;
    }
    return true;
}

inline bool converges_pointwise(const MeasureSequence& seq, const IdempotentMeasure& limit,
                                std::span<const TestFunction> panel, double eps,
                                std::optional<std::size_t> tail = std::nullopt) {
    for (std::size_t t = seq.tail_begin(tail.value_or(seq.default_tail())); t < seq.size(); ++t) {
        if (!in_neighborhood(seq[t], limit, panel, eps)) return false;
    }
    return true;
}

struct SeparatingPanel {
    Panel functions;
    double lipschitz = 0.0;
};

/**
 * Test functions that expose both failure modes of star_condition:
 * a bump of height h and radius r at every atom of `limit` (an atom of the
 * limit with nothing nearby in mu_t), and h * min(1, dist(x, supp limit) / r)
 * (an atom of mu_t far from the limit's support). The height exceeds every
 * |weight| involved, so an untracked atom moves the integral by at least 1.
 */
inline SeparatingPanel separating_panel(const IdempotentMeasure& limit, std::span<const IdempotentMeasure> others,
                                        double radius) {
    detail::require_positive(radius, "panel radius");
    const auto& space = limit.space();
    double height = 0.0;
    for (const auto& a : limit.atoms()) height = std::max(height, std::abs(a.weight));
    for (const auto& m : others) {
        for (const auto& a : m.atoms()) height = std::max(height, std::abs(a.weight));
    }
    height += 1.0;

    SeparatingPanel panel;
    panel.lipschitz = height / radius;
    panel.functions.push_back(TestFunction::constant(space, 0.0));
    for (const auto& a : limit.atoms()) {
        panel.functions.push_back(TestFunction::tabulate(space, [&](PointRef x) {
            return height * std::max(0.0, 1.0 - space.distance(x, a.point) / radius);
        }));
    }
    panel.functions.push_back(TestFunction::tabulate(space, [&](PointRef x) {
        double d = HUGE_VAL;
        for (const auto& a : limit.atoms()) d = std::min(d, space.distance(x, a.point));
        return height * std::min(1.0, d / radius);
    }));
    return panel;
}

/// Tolerances for comparing the three verdicts on one family.
struct MatchedTolerances {
    double eps_x = kDefaultTrackingEps;
    double eps_weight = kDefaultTrackingEps;

    double metric() const noexcept { return eps_x + eps_weight; }
    double pointwise(double lipschitz) const noexcept { return eps_weight + lipschitz * eps_x; }
};

/**
 * A function certifying that `nu` misses atom `i` of `mu`: it equals
 * max|lambda| + margin at x_i and vanishes on supp nu, so
 * mu(phi) >= margin while nu(phi) = 0. Empty when x_i is in supp nu.
 */
inline std::optional<TestFunction> separating_certificate(const IdempotentMeasure& mu, std::size_t i,
                                                          const IdempotentMeasure& nu, double margin) {
    require_same_space(mu, nu);
    const auto& space = mu.space();
    const PointRef center = mu[i].point;
    double radius = HUGE_VAL;
    for (const auto& b : nu.atoms()) radius = std::min(radius, space.distance(center, b.point));
    if (!(radius > 0.0)) return std::nullopt;
    double peak = 0.0;
    for (const auto& a : mu.atoms()) peak = std::max(peak, std::abs(a.weight));
    peak += margin;
    return TestFunction::tabulate(space, [&](PointRef x) {
        return peak * std::max(0.0, 1.0 - space.distance(x, center) / radius);
    });
}

} // namespace idemp
