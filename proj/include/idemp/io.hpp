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
 * @file io.hpp
 * @brief JSON encodings of spaces, measures, test functions, maps, couplings
 * and distance reports.
 *
 *   scalar    finite number, or the string "-inf" for bottom
 *   space     {"type":"matrix","points":[ids],"d":[[...]],"diam":opt}
 *             {"type":"euclidean","dim":n,"points":{"id":[coords]},"diam":opt}
 *   measure   {"space": <name or inline space, optional>, "atoms":[{"point":id,"weight":w}]}
 *   function  {"values":{"id":v}}
 *   map       {"map":{"source id":"target id"}}
 *   coupling  {"mu1":measure,"mu2":measure,"entries":[{"j":j,"k":k,"gamma":g}]}
 *   report    {"H":h,"rho_omega":r,"truncated":b,"support":[[j,k]]}
 *
 * Coupling and report indices are 0-based positions in the id-sorted atom
 * order. Numbers are written with full round-trip precision.
 */

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "idemp/convergence.hpp"
#include "idemp/coupling.hpp"
#include "idemp/error.hpp"
#include "idemp/measure.hpp"
#include "idemp/metric.hpp"
#include "idemp/semiring.hpp"
#include "idemp/space.hpp"

namespace idemp::io {

using json = nlohmann::json;

namespace detail {

template <class T>
T get(const json& j, const char* what) {
    try {
        return j.get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, std::string(what) + ": " + e.what());
    }
}

inline const json& field(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::parse, std::string("missing field '") + key + "'");
    return j.at(key);
}

} // namespace detail

inline json parse(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, e.what());
    }
}

inline json read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::parse, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

inline json to_json(const MaxPlus& s) { return s.is_bottom() ? json("-inf") : json(s.value()); }

inline MaxPlus scalar_from_json(const json& j) {
    if (j.is_string()) {
        if (j.get<std::string>() == "-inf") return MaxPlus::bottom();
        throw Error(ErrorKind::parse, "scalar string must be \"-inf\"");
    }
    if (!j.is_number()) throw Error(ErrorKind::parse, "scalar must be a number or \"-inf\"");
    return MaxPlus(j.get<double>());
}

inline GroundSpace space_from_json(const json& j, GroundSpace::Check check = GroundSpace::Check::validate) {
    const auto type = detail::get<std::string>(detail::field(j, "type"), "space type");
    std::optional<double> declared;
    if (j.contains("diam") && !j.at("diam").is_null()) declared = detail::get<double>(j.at("diam"), "diam");
    if (type == "matrix") {
        auto ids = detail::get<std::vector<std::string>>(detail::field(j, "points"), "points");
        auto d = detail::get<std::vector<std::vector<double>>>(detail::field(j, "d"), "d");
        return GroundSpace::matrix(std::move(ids), std::move(d), declared, check);
    }
    if (type == "euclidean") {
        const auto dim = detail::get<std::size_t>(detail::field(j, "dim"), "dim");
        const auto& pts = detail::field(j, "points");
        if (!pts.is_object()) throw Error(ErrorKind::parse, "euclidean points must be an object id -> coordinates");
        std::vector<std::pair<std::string, std::vector<double>>> points;
        for (const auto& [id, coords] : pts.items()) {
            points.emplace_back(id, detail::get<std::vector<double>>(coords, "coordinates"));
        }
        return GroundSpace::euclidean(dim, std::move(points), declared, check);
    }
    throw Error(ErrorKind::parse, "unknown space type '" + type + "'");
}

inline json to_json(const GroundSpace& s) {
    json j;
    if (s.kind() == GroundSpace::Kind::matrix) {
        j["type"] = "matrix";
        j["points"] = s.ids();
        json d = json::array();
        for (std::size_t a = 0; a < s.size(); ++a) {
            json row = json::array();
            for (std::size_t b = 0; b < s.size(); ++b) row.push_back(s.distance(PointRef{a}, PointRef{b}));
            d.push_back(std::move(row));
        }
        j["d"] = std::move(d);
    } else {
        j["type"] = "euclidean";
        j["dim"] = s.dimension();
        json pts = json::object();
        for (std::size_t a = 0; a < s.size(); ++a) pts[s.ids()[a]] = s.coordinates(PointRef{a});
        j["points"] = std::move(pts);
    }
    if (auto d = s.declared_diameter()) j["diam"] = *d;
    return j;
}

/// An inline "space" must equal `space`; a string is an opaque label.
inline IdempotentMeasure measure_from_json(const json& j, const SpacePtr& space,
                                           Normalization mode = Normalization::strict,
                                           std::vector<std::string>* warnings = nullptr) {
    if (j.is_object() && j.contains("space") && j.at("space").is_object()) {
        const GroundSpace inline_space = space_from_json(j.at("space"));
        if (!(inline_space == *space)) throw Error(ErrorKind::space_mismatch, "measure refers to a different space");
    }
    const auto& atoms = detail::field(j, "atoms");
    if (!atoms.is_array()) throw Error(ErrorKind::parse, "atoms must be an array");
    std::vector<WeightedPoint> input;
    for (const auto& a : atoms) {
        const auto id = detail::get<std::string>(detail::field(a, "point"), "atom point");
        input.push_back({space->at(id), scalar_from_json(detail::field(a, "weight"))});
    }
    return make_measure(space, input, mode, warnings);
}

inline json to_json(const IdempotentMeasure& mu, bool inline_space = false) {
    json j;
    if (inline_space) j["space"] = to_json(mu.space());
    json atoms = json::array();
    for (const auto& a : mu.atoms()) atoms.push_back({{"point", mu.space().id(a.point)}, {"weight", a.weight}});
    j["atoms"] = std::move(atoms);
    return j;
}

inline TestFunction function_from_json(const json& j, const GroundSpace& space) {
    const auto& values = detail::field(j, "values");
    if (!values.is_object()) throw Error(ErrorKind::parse, "values must be an object id -> number");
    TestFunction phi(space.size());
    for (const auto& [id, v] : values.items()) phi.set(space.at(id), detail::get<double>(v, "function value"));
    return phi;
}

inline json to_json(const TestFunction& phi, const GroundSpace& space) {
    json values = json::object();
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (phi.defined_at(PointRef{i})) values[space.ids()[i]] = phi(PointRef{i});
    }
    return {{"values", values}};
}

inline PointMap map_from_json(const json& j, const GroundSpace& source, const GroundSpace& target) {
    const auto& m = detail::field(j, "map");
    if (!m.is_object()) throw Error(ErrorKind::parse, "map must be an object source id -> target id");
    PointMap f;
    for (const auto& [from, to] : m.items()) {
        f.emplace(source.at(from), target.at(detail::get<std::string>(to, "map target")));
    }
    return f;
}

inline json to_json(const Coupling& xi) {
    json entries = json::array();
    for (const auto& [p, g] : xi.entries()) entries.push_back({{"j", p.j}, {"k", p.k}, {"gamma", g}});
    return {{"mu1", to_json(xi.mu1())}, {"mu2", to_json(xi.mu2())}, {"entries", std::move(entries)}};
}

inline Coupling coupling_from_json(const json& j, const SpacePtr& space) {
    Coupling xi(measure_from_json(detail::field(j, "mu1"), space), measure_from_json(detail::field(j, "mu2"), space));
    const auto& entries = detail::field(j, "entries");
    if (!entries.is_array()) throw Error(ErrorKind::parse, "entries must be an array");
    for (const auto& e : entries) {
        const AtomPair p{detail::get<std::size_t>(detail::field(e, "j"), "j"),
                         detail::get<std::size_t>(detail::field(e, "k"), "k")};
        xi.set(p, scalar_from_json(detail::field(e, "gamma")));
    }
    return xi;
}

inline json to_json(const DistanceReport& r) {
    json support = json::array();
    for (const auto& p : r.support) support.push_back({p.j, p.k});
    return {{"H", r.H}, {"rho_omega", r.rho_omega}, {"truncated", r.truncated}, {"support", std::move(support)}};
}

/// A JSON array of measures, or {"measures": [...]}.
inline std::vector<IdempotentMeasure> measures_from_json(const json& j, const SpacePtr& space,
                                                         Normalization mode = Normalization::strict) {
    const json& list = j.is_object() ? detail::field(j, "measures") : j;
    if (!list.is_array()) throw Error(ErrorKind::parse, "expected an array of measures");
    std::vector<IdempotentMeasure> out;
    for (const auto& m : list) out.push_back(measure_from_json(m, space, mode));
    return out;
}

inline json to_json(const MetricReport& report) {
    json v = json::array();
    for (const auto& x : report.violations) {
        v.push_back({{"kind", to_string(x.kind)}, {"points", x.points}, {"excess", x.excess}});
    }
    return {{"ok", report.ok()}, {"violations", std::move(v)}};
}

} // namespace idemp::io
