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
 * @file semiring.hpp
 * @brief The max-plus semiring R_max = (R u {-inf}, max, +).
 *
 *   a (+) b = max(a, b)      zero = -inf (bottom)
 *   a (.) b = a + b          one  = 0
 *
 * Bottom is a tagged state, never an IEEE infinity inside arithmetic, so
 * no operation can produce NaN. `oplus_h` is the log-sum-exp deformation
 * whose h -> 0 limit is `oplus`.
 */

#include <algorithm>
#include <cmath>
#include <compare>
#include <string>

#include "idemp/error.hpp"

namespace idemp {

class MaxPlus {
public:
    /// The unit 0.
    constexpr MaxPlus() noexcept = default;

    explicit MaxPlus(double value) : value_(value) {
        if (!std::isfinite(value)) {
            throw Error(ErrorKind::invalid_argument,
                        "max-plus scalar must be finite; use MaxPlus::bottom() for -inf");
        }
    }

    static constexpr MaxPlus bottom() noexcept { return MaxPlus(BottomTag{}); }
    static constexpr MaxPlus unit() noexcept { return MaxPlus(); }

    constexpr bool is_bottom() const noexcept { return bottom_; }
    constexpr bool is_finite() const noexcept { return !bottom_; }

    double value() const {
        if (bottom_) throw Error(ErrorKind::invalid_argument, "value() of bottom");
        return value_;
    }

    /// Finite value or -infinity; for display and comparisons only.
    double as_double() const noexcept {
        return bottom_ ? -HUGE_VAL : value_;
    }

    friend constexpr bool operator==(const MaxPlus& a, const MaxPlus& b) noexcept {
        if (a.bottom_ || b.bottom_) return a.bottom_ == b.bottom_;
        return a.value_ == b.value_;
    }

    friend constexpr std::partial_ordering operator<=>(const MaxPlus& a, const MaxPlus& b) noexcept {
        if (a.bottom_ && b.bottom_) return std::partial_ordering::equivalent;
        if (a.bottom_) return std::partial_ordering::less;
        if (b.bottom_) return std::partial_ordering::greater;
        return a.value_ <=> b.value_;
    }

private:
    struct BottomTag {};
    constexpr explicit MaxPlus(BottomTag) noexcept : bottom_(true) {}

    double value_ = 0.0;
    bool bottom_ = false;
};

inline MaxPlus oplus(const MaxPlus& a, const MaxPlus& b) noexcept {
    if (a.is_bottom()) return b;
    if (b.is_bottom()) return a;
    return a.value() >= b.value() ? a : b;
}

inline MaxPlus odot(const MaxPlus& a, const MaxPlus& b) {
    if (a.is_bottom() || b.is_bottom()) return MaxPlus::bottom();
    return MaxPlus(a.value() + b.value());
}

/// The semiring order: a precedes b iff a (+) b = b.
inline bool precedes(const MaxPlus& a, const MaxPlus& b) noexcept {
    return oplus(a, b) == b;
}

/// h ln(e^{u/h} + e^{v/h}), evaluated as m + h log1p(e^{-|u-v|/h}).
inline double oplus_h(double u, double v, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw Error(ErrorKind::invalid_argument, "dequantization parameter h must be positive");
    }
    if (!std::isfinite(u) || !std::isfinite(v)) {
        throw Error(ErrorKind::invalid_argument, "oplus_h needs finite arguments");
    }
    const double m = std::max(u, v);
    return m + h * std::log1p(std::exp(-std::abs(u - v) / h));
}

} // namespace idemp
