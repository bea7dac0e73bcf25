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
 * @file measure.hpp
 * @brief Finitely supported idempotent probability measures.
 *
 * A measure is the max-combination  mu = (+)_i lambda_i (.) delta_{x_i}
 * with distinct points, finite weights lambda_i <= 0 and max_i lambda_i = 0.
 * Atoms are kept sorted by point id, which makes the decomposition
 * canonical: two measures are equal iff their atom lists are equal.
 *
 * The Maslov integral of phi is  mu(phi) = max_i (lambda_i + phi(x_i)).
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "idemp/error.hpp"
#include "idemp/semiring.hpp"
#include "idemp/space.hpp"

namespace idemp {

/// Tolerance for the normalization max weight = 0 in strict mode.
inline constexpr double kNormalizationTolerance = 1e-9;

struct Atom {
    PointRef point;
    double weight = 0.0;

    friend bool operator==(const Atom&, const Atom&) = default;
};

/// Input atom; the weight may be bottom.
struct WeightedPoint {
    PointRef point;
    MaxPlus weight;
};

enum class Normalization { strict, autonormalize };

class IdempotentMeasure {
public:
    const GroundSpace& space() const noexcept { return *space_; }
    const SpacePtr& space_ptr() const noexcept { return space_; }
    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    const Atom& operator[](std::size_t i) const { return atoms_.at(i); }

    /// Position of `p` in the canonical atom order, if it is a support point.
    std::optional<std::size_t> position(PointRef p) const {
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            if (atoms_[i].point == p) return i;
        }
        return std::nullopt;
    }

    /// Wraps atoms without merging, sorting or normalizing. Only for probing
    /// the axiom checks with malformed data.
    static IdempotentMeasure unchecked(SpacePtr space, std::vector<Atom> atoms) {
        return IdempotentMeasure(std::move(space), std::move(atoms));
    }

    friend bool operator==(const IdempotentMeasure& a, const IdempotentMeasure& b) {
        return same_space(a.space_, b.space_) && a.atoms_ == b.atoms_;
    }

private:
    IdempotentMeasure(SpacePtr space, std::vector<Atom> atoms)
        : space_(std::move(space)), atoms_(std::move(atoms)) {}

    friend IdempotentMeasure make_measure(SpacePtr, std::span<const WeightedPoint>, Normalization,
                                          std::vector<std::string>*);

    SpacePtr space_;
    std::vector<Atom> atoms_;
};

/// Merges duplicate points by max, drops bottom weights, normalizes per `mode`
/// and sorts atoms by point id. Dropped atoms are reported in `warnings`.
inline IdempotentMeasure make_measure(SpacePtr space, std::span<const WeightedPoint> input,
                                      Normalization mode = Normalization::strict,
                                      std::vector<std::string>* warnings = nullptr) {
    if (!space) throw Error(ErrorKind::invalid_argument, "measure needs a ground space");
    if (input.empty()) throw Error(ErrorKind::normalization, "empty atom list");

    std::map<std::size_t, MaxPlus> merged;
    for (const auto& wp : input) {
        if (!space->contains(wp.point)) {
            throw Error(ErrorKind::unknown_point, "atom point index " + std::to_string(wp.point.index));
        }
        auto [it, inserted] = merged.emplace(wp.point.index, wp.weight);
        if (!inserted) it->second = oplus(it->second, wp.weight);
    }

    std::vector<Atom> atoms;
    for (const auto& [index, weight] : merged) {
        if (weight.is_bottom()) {
            if (warnings) warnings->push_back("dropped -inf atom at '" + space->id(PointRef{index}) + "'");
            continue;
        }
        atoms.push_back({PointRef{index}, weight.value()});
    }
    if (atoms.empty()) throw Error(ErrorKind::normalization, "all atom weights are -inf");

    double top = atoms.front().weight;
    for (const auto& a : atoms) top = std::max(top, a.weight);

    if (mode == Normalization::strict && std::abs(top) > kNormalizationTolerance) {
        throw Error(ErrorKind::normalization, "max weight is " + std::to_string(top) + ", expected 0");
    }
    // Strict mode shifts by at most the tolerance, pinning the top weight to exactly 0.
    for (auto& a : atoms) a.weight -= top;

    std::sort(atoms.begin(), atoms.end(), [&](const Atom& a, const Atom& b) {
        return space->id(a.point) < space->id(b.point);
    });
    return IdempotentMeasure(std::move(space), std::move(atoms));
}

inline IdempotentMeasure make_measure(SpacePtr space, std::span<const std::pair<std::string, MaxPlus>> input,
                                      Normalization mode = Normalization::strict,
                                      std::vector<std::string>* warnings = nullptr) {
    std::vector<WeightedPoint> points;
    points.reserve(input.size());
    for (const auto& [id, w] : input) points.push_back({space->at(id), w});
    return make_measure(std::move(space), points, mode, warnings);
}

/// Convenience for finite weights given by id.
inline IdempotentMeasure make_measure(SpacePtr space, std::initializer_list<std::pair<const char*, double>> input,
                                      Normalization mode = Normalization::strict) {
    std::vector<WeightedPoint> points;
    for (const auto& [id, w] : input) points.push_back({space->at(id), MaxPlus(w)});
    return make_measure(std::move(space), points, mode);
}

inline IdempotentMeasure dirac(SpacePtr space, PointRef x) {
    const WeightedPoint atom{x, MaxPlus::unit()};
    return make_measure(std::move(space), std::span<const WeightedPoint>(&atom, 1));
}

inline IdempotentMeasure dirac(const SpacePtr& space, std::string_view id) { return dirac(space, space->at(id)); }

/// A real function on the registered points; possibly partial.
class TestFunction {
public:
    TestFunction() = default;
    explicit TestFunction(std::size_t space_size) : values_(space_size) {}

    template <class F>
    static TestFunction tabulate(const GroundSpace& space, F&& f) {
        TestFunction fn(space.size());
        for (std::size_t i = 0; i < space.size(); ++i) fn.set(PointRef{i}, f(PointRef{i}));
        return fn;
    }

    static TestFunction constant(const GroundSpace& space, double c) {
        return tabulate(space, [c](PointRef) { return c; });
    }

    void set(PointRef p, double v) {
        if (p.index >= values_.size()) values_.resize(p.index + 1);
        values_[p.index] = v;
    }

    bool defined_at(PointRef p) const noexcept { return p.index < values_.size() && values_[p.index].has_value(); }

    double operator()(PointRef p) const {
        if (!defined_at(p)) {
            throw Error(ErrorKind::invalid_argument,
                        "test function undefined at point index " + std::to_string(p.index));
        }
        return *values_[p.index];
    }

    std::size_t extent() const noexcept { return values_.size(); }

private:
    std::vector<std::optional<double>> values_;
};

/// Maslov integral: max_i (lambda_i + phi(x_i)).
inline double integrate(const IdempotentMeasure& mu, const TestFunction& phi) {
    double best = -HUGE_VAL;
    for (const auto& a : mu.atoms()) best = std::max(best, a.weight + phi(a.point));
    return best;
}

/// Pointwise max of two test functions on their common domain.
inline TestFunction pointwise_max(const TestFunction& phi, const TestFunction& psi) {
    TestFunction out(std::max(phi.extent(), psi.extent()));
    for (std::size_t i = 0; i < out.extent(); ++i) {
        const PointRef p{i};
        if (phi.defined_at(p) && psi.defined_at(p)) out.set(p, std::max(phi(p), psi(p)));
    }
    return out;
}

inline TestFunction shifted(const TestFunction& phi, double c) {
    TestFunction out(phi.extent());
    for (std::size_t i = 0; i < phi.extent(); ++i) {
        if (phi.defined_at(PointRef{i})) out.set(PointRef{i}, phi(PointRef{i}) + c);
    }
    return out;
}

using PointMap = std::map<PointRef, PointRef>;

/// The image measure I(f)(mu): atoms (f(x_i), lambda_i), coinciding images merged by max.
template <class F>
    requires std::is_invocable_r_v<std::optional<PointRef>, F, PointRef>
IdempotentMeasure pushforward(F&& f, const IdempotentMeasure& mu, SpacePtr target) {
    std::vector<WeightedPoint> image;
    image.reserve(mu.size());
    for (const auto& a : mu.atoms()) {
        std::optional<PointRef> y = f(a.point);
        if (!y) {
            throw Error(ErrorKind::unknown_point,
                        "map undefined at support point '" + mu.space().id(a.point) + "'");
        }
        if (!target->contains(*y)) {
            throw Error(ErrorKind::unknown_point, "map image outside the target space");
        }
        image.push_back({*y, MaxPlus(a.weight)});
    }
    return make_measure(std::move(target), image, Normalization::strict);
}

inline IdempotentMeasure pushforward(const PointMap& f, const IdempotentMeasure& mu, SpacePtr target) {
    return pushforward(
        [&f](PointRef p) -> std::optional<PointRef> {
            auto it = f.find(p);
            if (it == f.end()) return std::nullopt;
            return it->second;
        },
        mu, std::move(target));
}

/// phi o f on the domain of f (points where phi(f(x)) is defined).
inline TestFunction compose(const TestFunction& phi, const PointMap& f) {
    TestFunction out;
    for (const auto& [x, y] : f) {
        if (phi.defined_at(y)) out.set(x, phi(y));
    }
    return out;
}

/// g o f.
inline PointMap compose(const PointMap& g, const PointMap& f) {
    PointMap out;
    for (const auto& [x, y] : f) {
        if (auto it = g.find(y); it != g.end()) out.emplace(x, it->second);
    }
    return out;
}

inline std::vector<PointRef> support(const IdempotentMeasure& mu) {
    std::vector<PointRef> pts;
    pts.reserve(mu.size());
    for (const auto& a : mu.atoms()) pts.push_back(a.point);
    return pts;
}

inline std::size_t support_size(const IdempotentMeasure& mu) noexcept { return mu.size(); }

/// Residuals of the three functional axioms evaluated through `integrate`:
/// mu(lambda_X) = lambda, mu(lambda (.) phi) = mu(phi) + lambda, mu(phi (+) psi) = mu(phi) (+) mu(psi).
struct AxiomReport {
    double constant_residual = 0.0;
    double shift_residual = 0.0;
    double max_residual = 0.0;

    double worst() const noexcept { return std::max({constant_residual, shift_residual, max_residual}); }
};

inline AxiomReport check_axioms(const IdempotentMeasure& mu, const TestFunction& phi, const TestFunction& psi,
                                double lambda) {
    AxiomReport r;
    const auto constant = TestFunction::constant(mu.space(), lambda);
    r.constant_residual = std::abs(integrate(mu, constant) - lambda);
    r.shift_residual = std::abs(integrate(mu, shifted(phi, lambda)) - (integrate(mu, phi) + lambda));
    r.max_residual = std::abs(integrate(mu, pointwise_max(phi, psi)) -
                              std::max(integrate(mu, phi), integrate(mu, psi)));
    return r;
}

} // namespace idemp
