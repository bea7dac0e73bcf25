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

#include "commands.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "idemp.hpp"
#include "idemp/io.hpp"

namespace idemp::cli {
namespace {

using io::json;

constexpr std::uint64_t kDefaultSeed = 20240601;

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Rounds every float in the tree to 12 significant digits.
void round12(json& j) {
    if (j.is_number_float()) {
        j = std::stod(fmt12(j.get<double>()));
    } else if (j.is_array() || j.is_object()) {
        for (auto& v : j) round12(v);
    }
}

void emit(std::ostream& out, json j) {
    round12(j);
    out << j.dump(2) << '\n';
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse: return kParseError;
        case ErrorKind::metric_validation: return kMetricValidation;
        case ErrorKind::normalization: return kNormalization;
        case ErrorKind::space_mismatch:
        case ErrorKind::unknown_point: return kSpaceMismatch;
        case ErrorKind::oracle_mismatch: return kOracleMismatch;
        case ErrorKind::invalid_argument:
        case ErrorKind::guard_exceeded: return kFailure;
    }
    return kFailure;
}

SpacePtr load_space(const std::string& path) { return share(io::space_from_json(io::read_file(path))); }

Normalization mode_of(bool autonormalize) {
    return autonormalize ? Normalization::autonormalize : Normalization::strict;
}

IdempotentMeasure load_measure(const std::string& path, const SpacePtr& space, bool autonormalize,
                               std::ostream& err) {
    std::vector<std::string> warnings;
    auto mu = io::measure_from_json(io::read_file(path), space, mode_of(autonormalize), &warnings);
    for (const auto& w : warnings) err << "warning: " << path << ": " << w << '\n';
    return mu;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::parse, "bad number '" + item + "' in list");
        }
    }
    if (values.empty()) throw Error(ErrorKind::parse, "empty list");
    return values;
}

struct Common {
    std::string space;
    bool autonormalize = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("space", c.space, "ground space JSON")->required();
    cmd->add_flag("--autonormalize", c.autonormalize, "shift weights so the maximum is 0 instead of rejecting");
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Idempotent Kantorovich distance toolkit"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Common common;
    std::string mu1_path, mu2_path, format = "json", mode = "xi0", extra_path, limit_path, target_path, h_list;
    bool oracle = false;
    std::uint64_t seed = kDefaultSeed;
    unsigned threads = 1;
    double u = 0.0, v = 0.0, eps_x = kDefaultTrackingEps, eps_weight = kDefaultTrackingEps, radius = 0.25;
    std::optional<std::size_t> tail;
    std::vector<std::string> measure_paths;

    auto* dist = app.add_subcommand("dist", "distance between two measures");
    add_common(dist, common);
    dist->add_option("mu1", mu1_path)->required();
    dist->add_option("mu2", mu2_path)->required();
    dist->add_flag("--oracle", oracle, "also run the exhaustive solver and require equality");
    dist->add_option("--format", format)->check(CLI::IsMember({"json", "text"}));

    auto* couple = app.add_subcommand("couple", "emit a coupling of two measures");
    add_common(couple, common);
    couple->add_option("mu1", mu1_path)->required();
    couple->add_option("mu2", mu2_path)->required();
    couple->add_option("--mode", mode)->check(CLI::IsMember({"xi0", "random", "optimal"}));
    couple->add_option("--seed", seed);

    auto* integ = app.add_subcommand("integrate", "Maslov integral of a test function");
    add_common(integ, common);
    integ->add_option("mu", mu1_path)->required();
    integ->add_option("phi", extra_path)->required();

    auto* push = app.add_subcommand("push", "image of a measure under a point map");
    add_common(push, common);
    push->add_option("mu", mu1_path)->required();
    push->add_option("map", extra_path)->required();
    push->add_option("--target", target_path, "target space JSON (default: the source space)");

    auto* gram_cmd = app.add_subcommand("gram", "pairwise truncated distances of a directory of measures");
    add_common(gram_cmd, common);
    gram_cmd->add_option("measures-dir", extra_path)->required();
    gram_cmd->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));
    gram_cmd->add_option("--threads", threads)->check(CLI::Range(1u, 256u));

    auto* conv = app.add_subcommand("converge", "convergence diagnostics for a measure sequence");
    add_common(conv, common);
    conv->add_option("sequence", extra_path)->required();
    conv->add_option("limit", limit_path)->required();
    conv->add_option("--eps-x", eps_x);
    conv->add_option("--eps-weight", eps_weight);
    conv->add_option("--tail", tail, "number of trailing elements to test (default: last 25%)");
    conv->add_option("--radius", radius, "support radius of the separating panel");
    conv->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

    auto* deq = app.add_subcommand("dequantize", "tabulate h ln(e^{u/h} + e^{v/h}) against max(u, v)");
    deq->add_option("u", u)->required();
    deq->add_option("v", v)->required();
    deq->add_option("h-values", h_list, "comma-separated list of h > 0")->required();

    auto* validate = app.add_subcommand("validate", "check a space (and optional measures) for validity");
    validate->add_option("space", common.space)->required();
    validate->add_option("measures", measure_paths);
    validate->add_flag("--autonormalize", common.autonormalize);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    }

    try {
        if (dist->parsed()) {
            auto space = load_space(common.space);
            auto mu1 = load_measure(mu1_path, space, common.autonormalize, err);
            auto mu2 = load_measure(mu2_path, space, common.autonormalize, err);
            const auto costs = cost_matrix(mu1, mu2);
            const auto report = distance(mu1, mu2, costs);
            json j = io::to_json(report);
            if (oracle) {
                const auto brute = distance_bruteforce(mu1, mu2, costs);
                j["H_oracle"] = brute.H;
                if (brute.H != report.H) {
                    emit(out, j);
                    throw Error(ErrorKind::oracle_mismatch,
                                "closed form " + fmt12(report.H) + " != exhaustive " + fmt12(brute.H));
                }
            }
            if (format == "text") {
                out << "H " << fmt12(report.H) << '\n'
                    << "rho_omega " << fmt12(report.rho_omega) << '\n'
                    << "truncated " << (report.truncated ? "true" : "false") << '\n'
                    << "support";
                for (const auto& p : report.support) out << ' ' << p.j << ':' << p.k;
                out << '\n';
                if (oracle) out << "H_oracle " << fmt12(j["H_oracle"].get<double>()) << '\n';
            } else {
                emit(out, j);
            }
        } else if (couple->parsed()) {
            auto space = load_space(common.space);
            auto mu1 = load_measure(mu1_path, space, common.autonormalize, err);
            auto mu2 = load_measure(mu2_path, space, common.autonormalize, err);
            Coupling xi = mode == "xi0"      ? xi0(mu1, mu2)
                          : mode == "random" ? random_member(mu1, mu2, seed)
                                             : coupling_from_support(mu1, mu2, distance(mu1, mu2).support);
            if (!check_marginals(xi).ok) throw Error(ErrorKind::oracle_mismatch, "coupling failed marginal check");
            emit(out, io::to_json(xi));
        } else if (integ->parsed()) {
            auto space = load_space(common.space);
            auto mu = load_measure(mu1_path, space, common.autonormalize, err);
            const auto phi = io::function_from_json(io::read_file(extra_path), *space);
            for (const auto& a : mu.atoms()) {
                if (!phi.defined_at(a.point)) {
                    throw Error(ErrorKind::space_mismatch, "function undefined at '" + space->id(a.point) + "'");
                }
            }
            out << fmt12(integrate(mu, phi)) << '\n';
        } else if (push->parsed()) {
            auto space = load_space(common.space);
            auto target = target_path.empty() ? space : load_space(target_path);
            auto mu = load_measure(mu1_path, space, common.autonormalize, err);
            const auto f = io::map_from_json(io::read_file(extra_path), *space, *target);
            emit(out, io::to_json(pushforward(f, mu, target)));
        } else if (gram_cmd->parsed()) {
            auto space = load_space(common.space);
            std::vector<std::filesystem::path> files;
            for (const auto& entry : std::filesystem::directory_iterator(extra_path)) {
                if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
            }
            std::sort(files.begin(), files.end());
            std::vector<IdempotentMeasure> measures;
            std::vector<std::string> names;
            for (const auto& f : files) {
                measures.push_back(load_measure(f.string(), space, common.autonormalize, err));
                names.push_back(f.stem().string());
            }
            const auto g = gram(measures, threads);
            if (format == "csv") {
                out << "name";
                for (const auto& n : names) out << ',' << n;
                out << '\n';
                for (std::size_t i = 0; i < g.size(); ++i) {
                    out << names[i];
                    for (std::size_t k = 0; k < g.size(); ++k) out << ',' << fmt12(g(i, k));
                    out << '\n';
                }
            } else {
                json rows = json::array();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    json row = json::array();
                    for (std::size_t k = 0; k < g.size(); ++k) row.push_back(g(i, k));
                    rows.push_back(std::move(row));
                }
                emit(out, {{"names", names}, {"matrix", std::move(rows)}});
            }
        } else if (conv->parsed()) {
            auto space = load_space(common.space);
            MeasureSequence seq(io::measures_from_json(io::read_file(extra_path), space, mode_of(common.autonormalize)));
            auto limit = load_measure(limit_path, space, common.autonormalize, err);
            const MatchedTolerances tol{eps_x, eps_weight};
            const auto star = star_condition(seq, limit, eps_x, eps_weight, tail);
            const auto panel = separating_panel(limit, seq.measures().subspan(star.tail_begin), radius);
            const bool metric_ok = converges_metric(seq, limit, tol.metric(), tail);
            const bool pointwise_ok =
                converges_pointwise(seq, limit, panel.functions, tol.pointwise(panel.lipschitz), tail);
            std::vector<double> rho;
            for (std::size_t t = star.tail_begin; t < seq.size(); ++t) rho.push_back(rho_omega(seq[t], limit));

            if (format == "csv") {
                out << "t,point,distance_residual,weight_residual,rho_omega\n";
                for (const auto& track : star.atoms) {
                    for (std::size_t i = 0; i < track.distance_residual.size(); ++i) {
                        out << star.tail_begin + i << ',' << space->id(track.point) << ','
                            << fmt12(track.distance_residual[i]) << ',' << fmt12(track.weight_residual[i]) << ','
                            << fmt12(rho[i]) << '\n';
                    }
                }
            } else {
                json atoms = json::array();
                for (const auto& track : star.atoms) {
                    atoms.push_back({{"point", space->id(track.point)},
                                     {"weight", track.weight},
                                     {"satisfied", track.satisfied},
                                     {"distance_residual", track.distance_residual},
                                     {"weight_residual", track.weight_residual}});
                }
                emit(out, {{"tail_begin", star.tail_begin},
                           {"star", {{"satisfied", star.satisfied},
                                     {"forward", star.forward_satisfied},
                                     {"reverse", star.reverse_satisfied},
                                     {"decisive", star.decisive},
                                     {"worst_distance", star.worst_distance},
                                     {"worst_weight", star.worst_weight},
                                     {"atoms", std::move(atoms)}}},
                           {"metric", {{"converges", metric_ok}, {"threshold", tol.metric()}, {"rho_omega", rho}}},
                           {"pointwise",
                            {{"converges", pointwise_ok},
                             {"threshold", tol.pointwise(panel.lipschitz)},
                             {"panel_size", panel.functions.size()},
                             {"lipschitz", panel.lipschitz}}}});
            }
        } else if (deq->parsed()) {
            const auto hs = parse_list(h_list);
            const double m = std::max(u, v);
            out << "h\toplus_h\tmax\tgap\tbound\n";
            for (double h : hs) {
                const double value = oplus_h(u, v, h);
                out << fmt12(h) << '\t' << fmt12(value) << '\t' << fmt12(m) << '\t' << fmt12(value - m) << '\t'
                    << fmt12(h * std::log(2.0)) << '\n';
            }
        } else if (validate->parsed()) {
            const auto space = io::space_from_json(io::read_file(common.space), GroundSpace::Check::skip);
            const auto report = validate_metric(space);
            json j = io::to_json(report);
            if (report.ok()) {
                auto shared = share(space);
                json measures = json::array();
                for (const auto& p : measure_paths) {
                    const auto mu = load_measure(p, shared, common.autonormalize, err);
                    measures.push_back({{"path", p}, {"support_size", support_size(mu)}});
                }
                j["measures"] = std::move(measures);
            }
            emit(out, j);
            if (!report.ok()) return kMetricValidation;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    }
    return kOk;
}

} // namespace idemp::cli
