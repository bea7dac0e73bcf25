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
 * @file space.hpp
 * @brief Finite ground metric spaces.
 *
 * A GroundSpace is either an explicit symmetric distance matrix over
 * string ids or a labeled Euclidean point cloud. The ambient diameter may be
 * declared larger than the registered points span; truncated distances use
 * the declared value.
 */

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "idemp/error.hpp"

namespace idemp {

/// Index of a registered point in its GroundSpace.
struct PointRef {
    std::size_t index = 0;

    friend constexpr auto operator<=>(const PointRef&, const PointRef&) = default;
};

/// Violations smaller than this are accepted as round-off.
inline constexpr double kMetricTolerance = 1e-9;

struct MetricViolation {
    enum class Kind { nonzero_diagonal, negative, asymmetry, zero_off_diagonal, triangle, diameter, duplicate_id, shape };

    Kind kind;
    std::vector<std::string> points;
    double excess = 0.0;

    std::string describe() const;
};

inline const char* to_string(MetricViolation::Kind kind) {
    using K = MetricViolation::Kind;
    switch (kind) {
        case K::nonzero_diagonal: return "nonzero_diagonal";
        case K::negative: return "negative";
        case K::asymmetry: return "asymmetry";
        case K::zero_off_diagonal: return "zero_off_diagonal";
        case K::triangle: return "triangle";
        case K::diameter: return "diameter";
        case K::duplicate_id: return "duplicate_id";
        case K::shape: return "shape";
    }
    return "unknown";
}

inline std::string MetricViolation::describe() const {
    std::ostringstream os;
    os << to_string(kind) << '(';
    for (std::size_t i = 0; i < points.size(); ++i) os << (i ? "," : "") << points[i];
    os << ") excess=" << excess;
    return os.str();
}

struct MetricReport {
    std::vector<MetricViolation> violations;

    bool ok() const noexcept { return violations.empty(); }
};

class GroundSpace {
public:
    enum class Kind { matrix, euclidean };
    enum class Check { validate, skip };

    /// Row-major distances; throws metric_validation unless `check` is skip.
    static GroundSpace matrix(std::vector<std::string> ids,
                              std::vector<std::vector<double>> distances,
                              std::optional<double> declared_diameter = std::nullopt,
                              Check check = Check::validate) {
        GroundSpace s;
        s.kind_ = Kind::matrix;
        s.ids_ = std::move(ids);
        s.declared_diam_ = declared_diameter;
        const std::size_t n = s.ids_.size();
        bool shape_ok = distances.size() == n;
        for (const auto& row : distances) shape_ok = shape_ok && row.size() == n;
        if (!shape_ok) {
            throw Error(ErrorKind::metric_validation, "distance matrix must be square with one row per point id");
        }
        s.dist_.reserve(n * n);
        for (const auto& row : distances) s.dist_.insert(s.dist_.end(), row.begin(), row.end());
        s.finish(check);
        return s;
    }

    static GroundSpace euclidean(std::size_t dim,
                                 std::vector<std::pair<std::string, std::vector<double>>> points,
                                 std::optional<double> declared_diameter = std::nullopt,
                                 Check check = Check::validate) {
        GroundSpace s;
        s.kind_ = Kind::euclidean;
        s.dim_ = dim;
        s.declared_diam_ = declared_diameter;
        for (auto& [id, coords] : points) {
            if (coords.size() != dim) {
                throw Error(ErrorKind::metric_validation,
                            "point '" + id + "' has " + std::to_string(coords.size()) +
                                " coordinates, expected " + std::to_string(dim));
            }
            for (double c : coords) {
                if (!std::isfinite(c)) throw Error(ErrorKind::metric_validation, "non-finite coordinate at '" + id + "'");
            }
            s.ids_.push_back(std::move(id));
            s.coords_.insert(s.coords_.end(), coords.begin(), coords.end());
        }
        s.finish(check);
        return s;
    }

    Kind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return ids_.size(); }
    std::size_t dimension() const noexcept { return dim_; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::string& id(PointRef p) const { return ids_.at(p.index); }
    std::optional<double> declared_diameter() const noexcept { return declared_diam_; }

    std::optional<PointRef> find(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) return std::nullopt;
        return PointRef{it->second};
    }

    PointRef at(std::string_view id) const {
        if (auto p = find(id)) return *p;
        throw Error(ErrorKind::unknown_point, "'" + std::string(id) + "' is not registered in the space");
    }

    bool contains(PointRef p) const noexcept { return p.index < ids_.size(); }

    double distance(PointRef x, PointRef y) const {
        require(x);
        require(y);
        if (kind_ == Kind::matrix) return dist_[x.index * size() + y.index];
        if (x == y) return 0.0;
        double sum = 0.0;
        for (std::size_t i = 0; i < dim_; ++i) {
            const double d = coords_[x.index * dim_ + i] - coords_[y.index * dim_ + i];
            sum += d * d;
        }
        return std::sqrt(sum);
    }

    double distance(std::string_view x, std::string_view y) const { return distance(at(x), at(y)); }

    std::vector<double> coordinates(PointRef p) const {
        require(p);
        if (kind_ != Kind::euclidean) return {};
        return {coords_.begin() + static_cast<std::ptrdiff_t>(p.index * dim_),
                coords_.begin() + static_cast<std::ptrdiff_t>((p.index + 1) * dim_)};
    }

    /// Largest pairwise distance over registered points.
    double max_pairwise() const noexcept { return max_pairwise_; }

    friend bool operator==(const GroundSpace& a, const GroundSpace& b) {
        return a.kind_ == b.kind_ && a.ids_ == b.ids_ && a.dim_ == b.dim_ && a.dist_ == b.dist_ &&
               a.coords_ == b.coords_ && a.declared_diam_ == b.declared_diam_;
    }

private:
    GroundSpace() = default;

    void require(PointRef p) const {
        if (!contains(p)) {
            throw Error(ErrorKind::unknown_point, "point index " + std::to_string(p.index) + " out of range");
        }
    }

    void finish(Check check) {
        for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            for (std::size_t j = i + 1; j < size(); ++j) m = std::max(m, distance(PointRef{i}, PointRef{j}));
        }
        max_pairwise_ = m;
        if (check == Check::validate) {
            auto report = validate();
            if (!report.ok()) {
                std::string msg = std::to_string(report.violations.size()) + " violation(s), first: " +
                                  report.violations.front().describe();
                throw Error(ErrorKind::metric_validation, msg);
            }
        }
    }

    MetricReport validate() const;

    friend MetricReport validate_metric(const GroundSpace& space);

    Kind kind_ = Kind::matrix;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t dim_ = 0;
    std::vector<double> dist_;
    std::vector<double> coords_;
    std::optional<double> declared_diam_;
    double max_pairwise_ = 0.0;
};

using SpacePtr = std::shared_ptr<const GroundSpace>;

inline SpacePtr share(GroundSpace space) { return std::make_shared<const GroundSpace>(std::move(space)); }

inline MetricReport GroundSpace::validate() const {
    using K = MetricViolation::Kind;
    MetricReport report;
    const std::size_t n = size();
    if (index_.size() != n) {
        std::vector<std::string> sorted = ids_;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t i = 1; i < n; ++i) {
            if (sorted[i] == sorted[i - 1]) report.violations.push_back({K::duplicate_id, {sorted[i]}, 0.0});
        }
    }
    if (declared_diam_ && (!std::isfinite(*declared_diam_) || *declared_diam_ < 0.0)) {
        report.violations.push_back({K::diameter, {}, -*declared_diam_});
    }

    if (kind_ == Kind::euclidean) {
        // Euclidean distances satisfy the axioms; only coincident points can fail.
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (distance(PointRef{i}, PointRef{j}) == 0.0) {
                    report.violations.push_back({K::zero_off_diagonal, {ids_[i], ids_[j]}, 0.0});
                }
            }
        }
    } else {
        auto d = [&](std::size_t i, std::size_t j) { return dist_[i * n + j]; };
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(d(i, i)) || d(i, i) != 0.0) {
                report.violations.push_back({K::nonzero_diagonal, {ids_[i]}, std::abs(d(i, i))});
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                if (!std::isfinite(d(i, j)) || d(i, j) < 0.0) {
                    report.violations.push_back({K::negative, {ids_[i], ids_[j]}, -d(i, j)});
                }
                if (j > i) {
                    if (std::abs(d(i, j) - d(j, i)) > kMetricTolerance || std::isnan(d(i, j) - d(j, i))) {
                        report.violations.push_back({K::asymmetry, {ids_[i], ids_[j]}, std::abs(d(i, j) - d(j, i))});
                    }
                    if (d(i, j) <= 0.0 || d(j, i) <= 0.0) {
                        report.violations.push_back({K::zero_off_diagonal, {ids_[i], ids_[j]}, 0.0});
                    }
                }
            }
        }
        // Each unordered triple (a, b, c) with a != c is checked once as a-b-c.
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t c = a + 1; c < n; ++c) {
                for (std::size_t b = 0; b < n; ++b) {
                    if (b == a || b == c) continue;
                    const double excess = d(a, c) - (d(a, b) + d(b, c));
                    if (excess > kMetricTolerance) {
                        report.violations.push_back({K::triangle, {ids_[a], ids_[b], ids_[c]}, excess});
                    }
                }
            }
        }
    }

    if (declared_diam_ && *declared_diam_ + kMetricTolerance < max_pairwise_) {
        report.violations.push_back({K::diameter, {}, max_pairwise_ - *declared_diam_});
    }
    return report;
}

/// Every violated axiom instance; empty for any space built with Check::validate.
inline MetricReport validate_metric(const GroundSpace& space) { return space.validate(); }

/// Declared diameter if present, else the largest registered pairwise distance.
inline double diam(const GroundSpace& space) {
    if (space.size() == 0) throw Error(ErrorKind::invalid_argument, "diameter of an empty space");
    if (auto d = space.declared_diameter()) return *d;
    return space.max_pairwise();
}

inline bool same_space(const SpacePtr& a, const SpacePtr& b) {
    return a == b || (a && b && *a == *b);
}

} // namespace idemp
