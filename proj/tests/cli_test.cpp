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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "idemp/io.hpp"

using namespace idemp;
namespace fs = std::filesystem;

namespace {

const std::string kData = IDEMP_TEST_DATA;
const std::string kWorked = kData + "/worked/";

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class ScratchDir {
public:
    ScratchDir() {
        path_ = fs::temp_directory_path() /
                ("idemp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~ScratchDir() { fs::remove_all(path_); }

    std::string write(const std::string& name, const std::string& text) const {
        const auto p = path_ / name;
        std::ofstream(p) << text;
        return p.string();
    }

private:
    fs::path path_;
};

} // namespace

TEST(Cli, DistWorkedExampleMatchesGolden) {
    const auto r = run({"dist", kWorked + "space.json", kWorked + "mu1.json", kWorked + "mu2.json"});
    EXPECT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(r.out, slurp(kWorked + "dist.golden.json"));
    const auto j = io::parse(r.out);
    EXPECT_EQ(j["H"].get<double>(), 3.0);
    EXPECT_EQ(j["rho_omega"].get<double>(), 1.0);
    EXPECT_TRUE(j["truncated"].get<bool>());
}

TEST(Cli, DistWithOracleAndText) {
    auto r = run({"dist", kWorked + "space.json", kWorked + "mu1.json", kWorked + "mu2.json", "--oracle"});
    EXPECT_EQ(r.code, cli::kOk);
    EXPECT_EQ(io::parse(r.out)["H_oracle"].get<double>(), 3.0);

    r = run({"dist", kWorked + "space.json", kWorked + "mu1.json", kWorked + "mu2.json", "--format", "text"});
    EXPECT_EQ(r.out, "H 3\nrho_omega 1\ntruncated true\nsupport 0:0 0:1\n");
}

TEST(Cli, ExitCodes) {
    const std::string err = kData + "/errors/";
    EXPECT_EQ(run({}).code, cli::kParseError);
    EXPECT_EQ(run({"frobnicate"}).code, cli::kParseError);
    EXPECT_EQ(run({"dist", kWorked + "space.json"}).code, cli::kParseError);
    EXPECT_EQ(run({"dist", kWorked + "space.json", kWorked + "mu1.json", kWorked + "mu2.json", "--format", "xml"}).code,
              cli::kParseError);
    EXPECT_EQ(run({"dist", err + "bad_metric.json", kWorked + "mu1.json", kWorked + "mu2.json"}).code,
              cli::kMetricValidation);
    EXPECT_EQ(run({"dist", kWorked + "space.json", err + "unnormalized.json", kWorked + "mu2.json"}).code,
              cli::kNormalization);
    EXPECT_EQ(run({"dist", kWorked + "space.json", err + "unnormalized.json", kWorked + "mu2.json",
                   "--autonormalize"}).code,
              cli::kOk);
    EXPECT_EQ(run({"dist", kWorked + "space.json", err + "unknown_point.json", kWorked + "mu2.json"}).code,
              cli::kSpaceMismatch);
    EXPECT_EQ(run({"dist", kWorked + "space.json", err + "truncated.json", kWorked + "mu2.json"}).code,
              cli::kParseError);
    EXPECT_EQ(run({"dist", kWorked + "space.json", kWorked + "missing.json", kWorked + "mu2.json"}).code,
              cli::kParseError);
    const auto r = run({"dist", err + "bad_metric.json", kWorked + "mu1.json", kWorked + "mu2.json"});
    EXPECT_NE(r.err.find("triangle"), std::string::npos) << r.err;
}

TEST(Cli, InlineSpaceMismatch) {
    ScratchDir dir;
    const auto mu = dir.write("mu.json", R"({"space":{"type":"matrix","points":["a","b"],"d":[[0,2],[2,0]]},)"
                                         R"("atoms":[{"point":"a","weight":0}]})");
    EXPECT_EQ(run({"dist", kWorked + "space.json", mu, kWorked + "mu2.json"}).code, cli::kSpaceMismatch);
}

TEST(Cli, OracleGuard) {
    ScratchDir dir;
    const auto space = dir.write("space.json", R"({"type":"euclidean","dim":1,"points":)"
                                               R"({"a":[0],"b":[1],"c":[2],"d":[3],"e":[4]}})");
    const auto mu = dir.write("mu.json", R"({"atoms":[{"point":"a","weight":0},{"point":"b","weight":0},)"
                                         R"({"point":"c","weight":0},{"point":"d","weight":0},)"
                                         R"({"point":"e","weight":0}]})");
    EXPECT_EQ(run({"dist", space, mu, mu}).code, cli::kOk);
    const auto r = run({"dist", space, mu, mu, "--oracle"});
    EXPECT_EQ(r.code, cli::kFailure);
    EXPECT_NE(r.err.find("limit"), std::string::npos);
}

TEST(Cli, Couple) {
    const std::vector<std::string> base{"couple", kWorked + "space.json", kWorked + "mu1.json", kWorked + "mu2.json"};
    auto with = [&](std::vector<std::string> extra) {
        auto args = base;
        args.insert(args.end(), extra.begin(), extra.end());
        return run(args);
    };
    const auto x = with({});
    ASSERT_EQ(x.code, cli::kOk);
    const auto j = io::parse(x.out);
    ASSERT_EQ(j["entries"].size(), 2u);
    EXPECT_EQ(j["entries"][1]["gamma"].get<double>(), -2.0);
    EXPECT_EQ(with({"--mode", "random", "--seed", "7"}).out, with({"--mode", "random", "--seed", "7"}).out);
    EXPECT_EQ(with({"--mode", "optimal"}).code, cli::kOk);
    EXPECT_EQ(with({"--mode", "best"}).code, cli::kParseError);
}

TEST(Cli, RandomCouplingSeedsDiffer) {
    const std::string g = kData + "/gram/";
    auto at = [&](const char* seed) {
        return run({"couple", g + "space.json", g + "measures/m2.json", g + "measures/m3.json", "--mode", "random",
                    "--seed", seed})
            .out;
    };
    std::set<std::string> outs;
    for (const char* s : {"1", "2", "3", "4", "5", "6", "7", "8"}) outs.insert(at(s));
    EXPECT_GT(outs.size(), 1u);
}

TEST(Cli, IntegrateAndPush) {
    auto r = run({"integrate", kWorked + "space.json", kWorked + "mu2.json", kWorked + "phi.json"});
    EXPECT_EQ(r.code, cli::kOk);
    EXPECT_EQ(r.out, "3\n");

    r = run({"push", kWorked + "space.json", kWorked + "mu2.json", kWorked + "collapse.json"});
    EXPECT_EQ(r.code, cli::kOk);
    const auto image = io::parse(r.out);
    ASSERT_EQ(image["atoms"].size(), 1u);
    EXPECT_EQ(image["atoms"][0]["point"], "b");

    ScratchDir dir;
    const auto partial = dir.write("phi.json", R"({"values":{"a":1}})");
    EXPECT_EQ(run({"integrate", kWorked + "space.json", kWorked + "mu2.json", partial}).code, cli::kSpaceMismatch);
    const auto bad_map = dir.write("map.json", R"({"map":{"a":"zz","b":"a"}})");
    EXPECT_EQ(run({"push", kWorked + "space.json", kWorked + "mu2.json", bad_map}).code, cli::kSpaceMismatch);
}

TEST(Cli, Gram) {
    const std::string g = kData + "/gram/";
    auto r = run({"gram", g + "space.json", g + "measures", "--format", "csv"});
    EXPECT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(r.out, "name,m1,m2,m3\nm1,0,3,3\nm2,3,0,2\nm3,3,2,0\n");
    const auto json1 = run({"gram", g + "space.json", g + "measures"});
    const auto json4 = run({"gram", g + "space.json", g + "measures", "--threads", "4"});
    EXPECT_EQ(json1.out, json4.out);
    EXPECT_EQ(io::parse(json1.out)["matrix"][1][2].get<double>(), 2.0);
    EXPECT_EQ(run({"gram", g + "space.json", g + "nowhere"}).code, cli::kParseError);
}

TEST(Cli, Converge) {
    ScratchDir dir;
    const auto space = dir.write("space.json", R"({"type":"euclidean","dim":1,"points":)"
                                               R"({"a":[0],"b":[1],"b1":[1.5],"b2":[1.1],"b3":[1.01],"b4":[1.001]}})");
    const auto seq = dir.write("seq.json", R"({"measures":[)"
                                           R"({"atoms":[{"point":"a","weight":0},{"point":"b1","weight":-1}]},)"
                                           R"({"atoms":[{"point":"a","weight":0},{"point":"b2","weight":-1}]},)"
                                           R"({"atoms":[{"point":"a","weight":0},{"point":"b3","weight":-1}]},)"
                                           R"({"atoms":[{"point":"a","weight":0},{"point":"b4","weight":-1}]}]})");
    const auto limit = dir.write("limit.json", R"({"atoms":[{"point":"a","weight":0},{"point":"b","weight":-1}]})");

    auto r = run({"converge", space, seq, limit, "--eps-x", "0.002"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
    auto j = io::parse(r.out);
    EXPECT_EQ(j["tail_begin"].get<int>(), 3);
    EXPECT_TRUE(j["star"]["satisfied"].get<bool>());
    EXPECT_TRUE(j["metric"]["converges"].get<bool>());
    EXPECT_TRUE(j["pointwise"]["converges"].get<bool>());

    r = run({"converge", space, seq, limit, "--eps-x", "0.002", "--tail", "3"});
    j = io::parse(r.out);
    EXPECT_FALSE(j["star"]["satisfied"].get<bool>());
    EXPECT_FALSE(j["metric"]["converges"].get<bool>());
    EXPECT_FALSE(j["pointwise"]["converges"].get<bool>());

    r = run({"converge", space, seq, limit, "--format", "csv", "--tail", "2"});
    EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "t,point,distance_residual,weight_residual,rho_omega");
    EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
    EXPECT_EQ(run({"converge", space, seq, limit, "--tail", "9"}).code, cli::kFailure);
}

TEST(Cli, Dequantize) {
    auto r = run({"dequantize", "3", "5", "1,0.1,0.01"});
    ASSERT_EQ(r.code, cli::kOk);
    std::istringstream lines(r.out);
    std::string header;
    std::getline(lines, header);
    EXPECT_EQ(header, "h\toplus_h\tmax\tgap\tbound");
    int rows = 0;
    for (std::string line; std::getline(lines, line); ++rows) {
        double h, value, m, gap, bound;
        std::istringstream(line) >> h >> value >> m >> gap >> bound;
        EXPECT_EQ(m, 5.0);
        EXPECT_GE(gap, 0.0);
        EXPECT_LE(gap, bound + 1e-12);
    }
    EXPECT_EQ(rows, 3);
    EXPECT_EQ(run({"dequantize", "-2", "-7", "0.5"}).code, cli::kOk);
    EXPECT_EQ(run({"dequantize", "3", "5", "1,x"}).code, cli::kParseError);
    EXPECT_EQ(run({"dequantize", "3", "5", "0"}).code, cli::kFailure);
}

TEST(Cli, Validate) {
    auto r = run({"validate", kWorked + "space.json", kWorked + "mu1.json", kWorked + "mu2.json"});
    EXPECT_EQ(r.code, cli::kOk) << r.err;
    EXPECT_EQ(io::parse(r.out)["measures"].size(), 2u);

    r = run({"validate", kData + "/errors/bad_metric.json"});
    EXPECT_EQ(r.code, cli::kMetricValidation);
    EXPECT_NE(r.out.find("triangle"), std::string::npos) << r.out;

    r = run({"validate", kWorked + "space.json", kData + "/errors/unnormalized.json"});
    EXPECT_EQ(r.code, cli::kNormalization);
}
