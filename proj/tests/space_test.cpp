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

#include <gtest/gtest.h>

#include "idemp/io.hpp"
#include "idemp/space.hpp"
#include "support/generators.hpp"

using namespace idemp;

namespace {

GroundSpace triangle(double ab, double bc, double ac) {
    return GroundSpace::matrix({"a", "b", "c"}, {{0, ab, ac}, {ab, 0, bc}, {ac, bc, 0}}, std::nullopt,
                               GroundSpace::Check::skip);
}

bool has(const MetricReport& r, MetricViolation::Kind kind) {
    return std::any_of(r.violations.begin(), r.violations.end(), [&](const auto& v) { return v.kind == kind; });
}

} // namespace

TEST(Space, MatrixLookup) {
    const auto s = GroundSpace::matrix({"a", "b"}, {{0, 1}, {1, 0}});
    EXPECT_EQ(s.distance("a", "a"), 0.0);
    EXPECT_EQ(s.distance("a", "b"), 1.0);
    EXPECT_EQ(s.distance("b", "a"), 1.0);
}

TEST(Space, EuclideanDistance) {
    const auto s = GroundSpace::euclidean(2, {{"o", {0, 0}}, {"p", {3, 4}}});
    EXPECT_EQ(s.distance("o", "p"), 5.0);
    EXPECT_EQ(s.distance("p", "p"), 0.0);
}

TEST(Space, UnknownPoint) {
    const auto s = GroundSpace::matrix({"a", "b"}, {{0, 1}, {1, 0}});
    try {
        (void)s.distance("a", "zz");
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::unknown_point);
    }
    EXPECT_THROW((void)s.distance(PointRef{0}, PointRef{5}), Error);
}

TEST(Space, ValidateAcceptsMetric) {
    EXPECT_TRUE(validate_metric(triangle(1, 1, 1.5)).ok());
}

TEST(Space, ValidateFindsTriangleViolation) {
    const auto report = validate_metric(triangle(1, 1, 10));
    ASSERT_EQ(report.violations.size(), 1u);
    const auto& v = report.violations.front();
    EXPECT_EQ(v.kind, MetricViolation::Kind::triangle);
    EXPECT_EQ(v.points, (std::vector<std::string>{"a", "b", "c"}));
    EXPECT_DOUBLE_EQ(v.excess, 8.0);
}

TEST(Space, ValidateToleratesRoundoff) {
    EXPECT_TRUE(validate_metric(triangle(1, 1, 2 + 5e-10)).ok());
    EXPECT_FALSE(validate_metric(triangle(1, 1, 2 + 5e-9)).ok());
}

TEST(Space, ValidateFindsAsymmetryAndZeros) {
    const auto asym = GroundSpace::matrix({"a", "b"}, {{0, 1}, {2, 0}}, std::nullopt, GroundSpace::Check::skip);
    EXPECT_TRUE(has(validate_metric(asym), MetricViolation::Kind::asymmetry));

    const auto zero = GroundSpace::matrix({"a", "b"}, {{0, 0}, {0, 0}}, std::nullopt, GroundSpace::Check::skip);
    EXPECT_TRUE(has(validate_metric(zero), MetricViolation::Kind::zero_off_diagonal));

    const auto diag = GroundSpace::matrix({"a", "b"}, {{1, 1}, {1, 0}}, std::nullopt, GroundSpace::Check::skip);
    EXPECT_TRUE(has(validate_metric(diag), MetricViolation::Kind::nonzero_diagonal));

    const auto neg = GroundSpace::matrix({"a", "b"}, {{0, -1}, {-1, 0}}, std::nullopt, GroundSpace::Check::skip);
    EXPECT_TRUE(has(validate_metric(neg), MetricViolation::Kind::negative));

    const auto dup = GroundSpace::matrix({"a", "a"}, {{0, 1}, {1, 0}}, std::nullopt, GroundSpace::Check::skip);
    EXPECT_TRUE(has(validate_metric(dup), MetricViolation::Kind::duplicate_id));

    const auto same = GroundSpace::euclidean(1, {{"x", {1}}, {"y", {1}}}, std::nullopt, GroundSpace::Check::skip);
    EXPECT_TRUE(has(validate_metric(same), MetricViolation::Kind::zero_off_diagonal));
}

TEST(Space, ConstructionRejectsInvalidMetric) {
    try {
        (void)GroundSpace::matrix({"a", "b", "c"}, {{0, 1, 10}, {1, 0, 1}, {10, 1, 0}});
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::metric_validation);
    }
    EXPECT_THROW((void)GroundSpace::matrix({"a", "b"}, {{0, 1}}), Error);
    EXPECT_THROW((void)GroundSpace::euclidean(2, {{"a", {0, 0, 0}}}), Error);
}

TEST(Space, Diameter) {
    EXPECT_EQ(diam(GroundSpace::matrix({"a", "b"}, {{0, 1}, {1, 0}})), 1.0);
    EXPECT_EQ(diam(GroundSpace::matrix({"a"}, {{0}})), 0.0);
    EXPECT_EQ(diam(GroundSpace::euclidean(1, {{"a", {0}}, {"b", {5}}}, 7.0)), 7.0);
    EXPECT_THROW((void)diam(GroundSpace::matrix({}, {})), Error);
}

TEST(Space, DeclaredDiameterBelowSpreadIsRejected) {
    EXPECT_THROW((void)GroundSpace::euclidean(1, {{"a", {0}}, {"b", {5}}}, 4.0), Error);
    const auto s = GroundSpace::euclidean(1, {{"a", {0}}, {"b", {5}}}, 4.0, GroundSpace::Check::skip);
    EXPECT_TRUE(has(validate_metric(s), MetricViolation::Kind::diameter));
}

TEST(Space, JsonRoundTrip) {
    const auto text = R"({"type":"matrix","points":["a","b"],"d":[[0,1.5],[1.5,0]],"diam":3})";
    const auto s = io::space_from_json(io::parse(text));
    EXPECT_EQ(s.distance("a", "b"), 1.5);
    EXPECT_EQ(diam(s), 3.0);
    EXPECT_EQ(io::space_from_json(io::to_json(s)), s);

    const auto e = io::space_from_json(io::parse(R"({"type":"euclidean","dim":2,"points":{"o":[0,0],"p":[3,4]}})"));
    EXPECT_EQ(e.distance("o", "p"), 5.0);
    EXPECT_EQ(io::space_from_json(io::to_json(e)), e);
}

TEST(Space, JsonErrors) {
    auto kind_of = [](const char* text) {
        try {
            (void)io::space_from_json(io::parse(text));
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::invalid_argument;
    };
    EXPECT_EQ(kind_of("{"), ErrorKind::parse);
    EXPECT_EQ(kind_of(R"({"type":"torus"})"), ErrorKind::parse);
    EXPECT_EQ(kind_of(R"({"type":"matrix","points":["a"]})"), ErrorKind::parse);
    EXPECT_EQ(kind_of(R"({"type":"matrix","points":["a","b"],"d":[[0,2],[1,0]]})"), ErrorKind::metric_validation);
}

TEST(SpaceProperty, GeneratedSpacesAreValidAndDiameterMonotone) {
    gen::Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const auto family = static_cast<gen::SpaceFamily>(gen::pick(rng, 3));
        const auto s = gen::random_space(rng, 2 + gen::pick(rng, 5), family);
        EXPECT_TRUE(validate_metric(*s).ok());
        if (family == gen::SpaceFamily::euclidean) {
            // Adding a point can only grow the computed diameter.
            std::vector<std::pair<std::string, std::vector<double>>> pts;
            for (std::size_t p = 0; p < s->size(); ++p) pts.push_back({s->ids()[p], s->coordinates(PointRef{p})});
            pts.push_back({"extra", {gen::uniform(rng, -1, 3), gen::uniform(rng, -1, 3)}});
            const auto bigger = GroundSpace::euclidean(2, pts);
            EXPECT_GE(diam(bigger), diam(*s));
        }
    }
}
