// SPDX-License-Identifier: Apache-2.0
//
// bdfeedback: block diagonalization and limited-feedback MIMO broadcast simulation
// Copyright (C) 2026 The bdfeedback authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch2/catch_amalgamated.hpp>

#include "bdfb/bdfb.hpp"

#include <sstream>

using namespace bdfb;
using namespace bdfb::sim;

namespace
{
std::string to_csv(const std::vector<RateRecord> &r)
{
    std::ostringstream out;
    write_results(r, out);
    return out.str();
}

ScenarioConfig small_config()
{
    return parse_config("scenario_id = small\n"
                        "m = 4\nn = 2\nk = 2\n"
                        "snr_grid_db = 0, 10, 20\n"
                        "quantizer = rvq_explicit\n"
                        "bit_rule = fixed:6\n"
                        "trials = 40\n"
                        "seed = 17\n");
}
} // namespace

TEST_CASE("parse_config - accepted forms")
{
    const auto cfg = parse_config("# comment\n"
                                  "scenario_id = fig\n"
                                  "m = 6   # trailing comment\n"
                                  "n = 1\nk = 6\n"
                                  "snr_grid_db = 0:2.5:10\n"
                                  "quantizer = scalar\n"
                                  "bit_rule = scaled_zf_eq12\n"
                                  "scheme = zf\n"
                                  "trials = 12\n"
                                  "codebooks_per_trial = 2\n"
                                  "seed = 99\n"
                                  "scalar_reference = literal\n"
                                  "angle_split = dirichlet\n"
                                  "explicit_bits_cap = 16\n"
                                  "codebook_mode = fixed\n"
                                  "distortion_a = 0.25\n");
    CHECK(cfg.scenario_id == "fig");
    CHECK(cfg.snr_grid_db == std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0});
    CHECK(cfg.quantizer == QuantizerKind::scalar);
    CHECK(cfg.bit_rule.kind == BitRule::Kind::scaled_zf_3db);
    CHECK(cfg.scheme == Scheme::zf);
    CHECK(cfg.trials == 12);
    CHECK(cfg.codebooks_per_trial == 2);
    CHECK(cfg.seed == 99);
    CHECK(cfg.scalar_reference == ReferenceMode::literal);
    CHECK(cfg.angle_split == AngleSplit::dirichlet);
    CHECK(cfg.explicit_bits_cap == 16);
    CHECK(cfg.codebook_mode == CodebookMode::fixed);
    CHECK(cfg.distortion_a == 0.25);
    CHECK(cfg.bit_rule.bits_for(cfg.snr_grid_db, 6, 1) == std::vector<int>{0, 5, 9, 13, 17});

    const auto bd = parse_config("m=4\nn=2\nk=2\nsnr_grid_db=0,15\nquantizer=rvq_statistical\nbit_rule=scaled_bd_3db\n");
    CHECK(bd.bit_rule.bits_for(bd.snr_grid_db, 4, 2) == std::vector<int>{1, 21});
    const auto ex = parse_config("m=4\nn=2\nk=2\nsnr_grid_db=0,15\nquantizer=rvq_explicit\nbit_rule=explicit:3,5\n");
    CHECK(ex.bit_rule.bits_for(ex.snr_grid_db, 4, 2) == std::vector<int>{3, 5});
    CHECK(parse_config("m=4\nn=2\nk=2\nsnr_grid_db=5\nquantizer=perfect\n").trials == 1000);
}

TEST_CASE("parse_config - rejected inputs")
{
    const std::string base = "m=4\nn=2\nk=2\nsnr_grid_db=0,10\nquantizer=rvq_explicit\nbit_rule=fixed:4\n";
    CHECK_NOTHROW(parse_config(base));
    CHECK_THROWS_WITH(parse_config(base + "colour = blue\n"), Catch::Matchers::ContainsSubstring("unknown key 'colour'") &&
                                                                   Catch::Matchers::ContainsSubstring("line 7"));
    CHECK_THROWS_AS(parse_config("m=4\nn=2\nk=3\nsnr_grid_db=0\nquantizer=perfect\n"), ConfigError);
    CHECK_THROWS_WITH(parse_config("m=4\nn=2\nsnr_grid_db=0\nquantizer=perfect\n"), Catch::Matchers::ContainsSubstring("'k'"));
    CHECK_THROWS_AS(parse_config("m=4\nn=2\nk=2\nsnr_grid_db=0\nquantizer=rvq_explicit\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "m = 4\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("m=4\nn=2\nk=2\nsnr_grid_db=0\nquantizer=rvq_explicit\nbit_rule=some:3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("m=4\nn=2\nk=2\nsnr_grid_db=0,x\nquantizer=perfect\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("m=4\nn=2\nk=2\nsnr_grid_db=10:1:0\nquantizer=perfect\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "trials = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "seed = -3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config(base + "scenario_id = a,b\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("m=4\nn=2\nk=2\nsnr_grid_db=0,5\nquantizer=rvq_explicit\nbit_rule=explicit:3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("m=3\nn=2\nk=1\nsnr_grid_db=0\nquantizer=perfect\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/scenario.cfg"), ConfigError);
}

TEST_CASE("run_scenario - perfect quantizer has no loss and no interference")
{
    for (const char *scheme : {"BD", "ZF"})
    {
        auto cfg = parse_config(std::string("m=6\nn=2\nk=3\nsnr_grid_db=0,10,20,30\nquantizer=perfect\ntrials=50\nscheme=") + scheme + "\n");
        const auto res = run_scenario(cfg);
        REQUIRE(res.records.size() == 4);
        for (std::size_t i = 0; i < 4; ++i)
        {
            const auto &r = res.records[i];
            CHECK(std::abs(r.rate_loss) <= 1e-9);
            CHECK(r.sum_rate == res.points[i].perfect_sum_rate);
            CHECK(r.empirical_distortion == 0.0);
            CHECK(r.bits_per_user == 0);
            CHECK(res.points[i].leakage_trace <= 1e-20);
            CHECK(r.std_err > 0.0);
            CHECK(r.sum_rate == Catch::Approx(3 * r.per_user_rate).epsilon(1e-15));
        }
        CHECK(res.records[3].sum_rate > res.records[0].sum_rate);
    }
}

TEST_CASE("run_scenario - rate loss within the per-user bound")
{
    auto cfg = parse_config("scenario_id = bound\nm=4\nn=2\nk=2\nsnr_grid_db=0,5,10\nquantizer=rvq_explicit\nbit_rule=fixed:10\n"
                            "trials=10000\nseed=2024\n");
    const auto res = run_scenario(cfg);
    for (std::size_t i = 0; i < res.records.size(); ++i)
    {
        const auto &r = res.records[i];
        INFO("snr " << r.snr_db << " loss " << r.rate_loss << " bound " << r.theorem1_bound);
        CHECK(r.rate_loss > 0.0);
        CHECK(r.rate_loss <= r.theorem1_bound + 3.0 * res.points[i].rate_loss_std_err);
        CHECK(r.bits_per_user == 10);
        CHECK(r.quantizer == "rvq_explicit");
        CHECK(r.theorem1_bound == Catch::Approx(rate_loss_bound(2, db_to_linear(r.snr_db), r.empirical_distortion)));
        CHECK(r.distortion_bound == Catch::Approx(distortion_bound({4, 2, 10}).full));
        CHECK(res.points[i].leakage_samples == 20000);
    }
    CHECK(res.records[0].empirical_distortion == res.records[2].empirical_distortion);
}

TEST_CASE("run_scenario - deterministic output")
{
    auto cfg = small_config();
    const auto a = to_csv(run_scenario(cfg).records);
    const auto b = to_csv(run_scenario(cfg).records);
    CHECK(a == b);
    CHECK(to_csv(run_scenario(cfg, {3, false, {}}).records) == a);
    cfg.seed = 18;
    CHECK(to_csv(run_scenario(cfg).records) != a);

    for (const char *q : {"rvq_statistical", "scalar"})
    {
        auto c = parse_config(std::string("m=6\nn=1\nk=6\nscheme=ZF\nsnr_grid_db=5:5:20\nbit_rule=scaled_zf_3db\ntrials=30\nquantizer=") + q + "\n");
        CHECK(to_csv(run_scenario(c).records) == to_csv(run_scenario(c, {4, false, {}}).records));
    }
    auto fixed = small_config();
    fixed.codebook_mode = CodebookMode::fixed;
    fixed.codebooks_per_trial = 2;
    CHECK(to_csv(run_scenario(fixed).records) != a);
    CHECK(to_csv(run_scenario(fixed).records) == to_csv(run_scenario(fixed, {2, false, {}}).records));
}

TEST_CASE("run_scenario - cap switch and strict mode")
{
    auto cfg = small_config();
    cfg.bit_rule = BitRule{BitRule::Kind::explicit_list, 0, {4, 8, 12}};
    cfg.explicit_bits_cap = 8;
    std::vector<std::string> logged;
    const auto res = run_scenario(cfg, {1, false, [&](const std::string &s) { logged.push_back(s); }});
    CHECK(res.records[0].quantizer == "rvq_explicit");
    CHECK(res.records[1].quantizer == "rvq_explicit");
    CHECK(res.records[2].quantizer == "rvq_statistical");
    CHECK(res.notices.size() == 1);
    CHECK(logged == res.notices);
    CHECK_THROWS_AS(run_scenario(cfg, {1, true, {}}), ConfigError);
}

TEST_CASE("run_scenario - zero-bit scalar feedback cannot separate ZF users")
{
    // every user reconstructs the same all-ones direction
    auto cfg = parse_config("m=4\nn=1\nk=4\nscheme=ZF\nsnr_grid_db=0\nquantizer=scalar\nbit_rule=fixed:0\ntrials=3\n");
    CHECK_THROWS_AS(run_scenario(cfg, {1, true, {}}), DegenerateError);
    const auto res = run_scenario(cfg);
    CHECK(res.fallback_precoders == 3);
    CHECK(res.points[0].fallback_precoders == 3);
    CHECK(res.degenerate_resamples == 0);
    CHECK(res.records[0].sum_rate < res.points[0].perfect_sum_rate);
    CHECK(res.notices.size() == 1);
}

TEST_CASE("run_scenario - ZF feedback accounting")
{
    auto cfg = parse_config("m=4\nn=2\nk=2\nscheme=ZF\nsnr_grid_db=10\nquantizer=rvq_explicit\nbit_rule=fixed:5\ntrials=200\n");
    const auto res = run_scenario(cfg);
    CHECK(res.records[0].bits_per_user == 10);
    CHECK(res.records[0].scheme == "ZF");
    CHECK(res.points[0].distortion_samples == 800);
    CHECK(res.records[0].distortion_bound == Catch::Approx(distortion_bound({4, 1, 5}).full));
    CHECK(res.records[0].rate_loss > 0.0);
}

TEST_CASE("write_results and read_results - round trip and schema")
{
    auto res = run_scenario(small_config());
    res.records[1].sum_rate = 0.1 + 0.2;
    res.records[2].snr_db = -3.0000000000000004;
    std::stringstream io;
    write_results(res.records, io);
    CHECK(read_results(io) == res.records);

    std::stringstream empty;
    write_results({}, empty);
    CHECK(empty.str() == "scenario_id,scheme,quantizer,m,n,k,snr_db,bits_per_user,trials,sum_rate,per_user_rate,rate_loss,"
                         "theorem1_bound,empirical_distortion,distortion_bound,std_err\n");
    CHECK(read_results(empty).empty());

    std::string text = to_csv(res.records);
    std::string renamed = text;
    renamed.replace(renamed.find("std_err"), 7, "stderr_x");
    std::istringstream bad_col(renamed);
    CHECK_THROWS_WITH(read_results(bad_col), Catch::Matchers::ContainsSubstring("unknown column 'stderr_x'"));

    std::string extra = text;
    extra.insert(extra.find('\n'), ",colour");
    std::istringstream bad_extra(extra);
    CHECK_THROWS_WITH(read_results(bad_extra), Catch::Matchers::ContainsSubstring("colour"));

    std::string broken = text;
    const auto third = broken.find('\n', broken.find('\n', broken.find('\n') + 1) + 1);
    broken.insert(third, ",9");
    std::istringstream bad_row(broken);
    CHECK_THROWS_WITH(read_results(bad_row), Catch::Matchers::ContainsSubstring("line 3"));

    std::string garbage = text;
    garbage.replace(garbage.find("small,BD,rvq_explicit,4"), 23, "small,BD,rvq_explicit,x");
    std::istringstream bad_num(garbage);
    CHECK_THROWS_WITH(read_results(bad_num), Catch::Matchers::ContainsSubstring("line 2"));

    std::istringstream none("");
    CHECK_THROWS_AS(read_results(none), CsvError);
}

TEST_CASE("measure_snr_gap - constructed curves")
{
    RateCurve base{{0, 5, 10, 15, 20}, {1.0, 2.1, 3.5, 5.0, 6.6}};
    const auto same = measure_snr_gap(base, base);
    CHECK(same.at_highest_rate == 0.0);
    CHECK(same.max_gap == 0.0);
    CHECK(same.gaps.size() == 5);

    RateCurve shifted = base;
    for (auto &s : shifted.snr_db)
        s += 3.0;
    const auto g = measure_snr_gap(shifted, base);
    CHECK(std::abs(g.at_highest_rate - 3.0) <= 0.01);
    CHECK(std::abs(g.max_gap - 3.0) <= 0.01);
    CHECK(g.snr_b.back() == 20.0);

    // linear interpolation inside a segment
    RateCurve line{{0, 10}, {0.0, 10.0}};
    RateCurve probe{{1, 2}, {4.0, 7.5}};
    const auto lg = measure_snr_gap(line, probe);
    CHECK(lg.gaps[0] == Catch::Approx(3.0));
    CHECK(lg.gaps[1] == Catch::Approx(5.5));

    RateCurve far{{0, 5}, {100.0, 101.0}};
    CHECK_THROWS_AS(measure_snr_gap(far, base), ParameterError);
    RateCurve bumpy{{0, 5, 10}, {1.0, 0.5, 2.0}};
    CHECK_THROWS_AS(measure_snr_gap(bumpy, base), ParameterError);
    RateCurve unsorted{{0, 10, 5}, {1.0, 2.0, 3.0}};
    CHECK_THROWS_AS(measure_snr_gap(unsorted, base), ParameterError);

    std::vector<RateRecord> ra, rb;
    for (std::size_t i = 0; i < 5; ++i)
    {
        RateRecord r;
        r.snr_db = base.snr_db[4 - i];
        r.sum_rate = base.rate[4 - i];
        rb.push_back(r);
        r.snr_db += 3.0;
        ra.push_back(r);
    }
    CHECK(std::abs(measure_snr_gap(ra, rb).at_highest_rate - 3.0) <= 0.01);
}
