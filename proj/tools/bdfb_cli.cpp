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

// Command-line front end: scenario simulation, bit-scaling calculators, distortion
// sweeps and SNR-gap measurement.

#include "bdfb/bdfb.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

namespace
{

using namespace bdfb;
using namespace bdfb::sim;

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_config = 2;
constexpr int exit_degenerate = 3;

struct GlobalFlags
{
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    int threads = 1;
    bool strict = false;
};

std::vector<double> parse_list(const std::string &text, const char *what)
{
    try
    {
        return sim::detail::parse_grid(text);
    }
    catch (const ConfigError &e)
    {
        throw ConfigError(std::string(what) + ": " + e.what());
    }
}

RunOptions run_options(const GlobalFlags &g)
{
    RunOptions o;
    o.threads = g.threads;
    o.strict = g.strict;
    o.log = [](const std::string &s) { std::cerr << s << '\n'; };
    return o;
}

int cmd_simulate(const GlobalFlags &g, const std::string &config_path, const std::string &out_path)
{
    ScenarioConfig cfg = load_config(config_path);
    if (g.seed)
        cfg.seed = *g.seed;
    if (g.trials)
        cfg.trials = *g.trials;
    cfg.validate();
    const auto res = run_scenario(cfg, run_options(g));
    write_results(res.records, out_path);
    std::printf("%-8s %6s %12s %12s %12s %12s\n", "snr_db", "bits", "sum_rate", "perfect", "rate_loss", "std_err");
    for (std::size_t i = 0; i < res.records.size(); ++i)
    {
        const auto &r = res.records[i];
        std::printf("%-8.3g %6d %12.6f %12.6f %12.6f %12.3g\n", r.snr_db, r.bits_per_user, r.sum_rate,
                    res.points[i].perfect_sum_rate, r.rate_loss, r.std_err);
    }
    std::printf("wrote %zu records to %s\n", res.records.size(), out_path.c_str());
    return exit_ok;
}

int cmd_scaling(int m, int n, const std::string &range, double target_b, const std::string &scheme_name)
{
    const Scheme scheme = sim::detail::lower(scheme_name) == "zf" ? Scheme::zf : Scheme::bd;
    std::printf("%-8s %14s %14s %14s\n", "p_db", "bits_closed", "bits_exact", "bits_3db");
    for (double p : parse_list(range, "--pdb-range"))
    {
        const ScalingQuery q{m, n, p, target_b, scheme};
        const double three_db = scheme == Scheme::zf ? bits_3db_zf(m, p) : bits_3db_bd(m, n, p);
        std::printf("%-8.4g %14.6f %14.6f %14.6f\n", p, bits_for_rate_loss(q), bits_for_rate_loss_exact(q), three_db);
    }
    return exit_ok;
}

int cmd_compare(int m, int n, double rate_target, double p_db)
{
    const auto c = compare_bd_zf_bits(m, n, p_db, rate_target);
    std::printf("m=%d n=%d p_db=%g rate_target=%g\n", m, n, p_db, rate_target);
    std::printf("rate_gap_per_user  %.6f\n", c.rate_gap_per_user);
    std::printf("target_b           %.6f\n", c.b);
    std::printf("zf_bits_total      %.6f\n", c.zf_bits_total);
    std::printf("bd_bits            %.6f\n", c.bd_bits);
    std::printf("savings_percent    %.4f\n", c.savings_percent);
    return exit_ok;
}

int cmd_distortion(const GlobalFlags &g, int m, int n, const std::string &range, int trials, const std::string &mode,
                   int cap)
{
    const bool statistical = sim::detail::lower(mode) == "statistical";
    if (!statistical && sim::detail::lower(mode) != "explicit")
        throw ConfigError("--mode: expected explicit or statistical");
    if (trials < 1)
        throw ConfigError("--trials must be at least 1");
    const std::uint64_t seed = g.seed.value_or(1);
    std::printf("%-6s %14s %12s %14s %14s\n", "bits", "distortion", "std_err", "bound_first", "bound_full");
    for (double bd : parse_list(range, "--bits-range"))
    {
        const int bits = static_cast<int>(bd);
        if (bits != bd || bits < 0)
            throw ConfigError("--bits-range: bits must be nonnegative integers");
        if (!statistical && bits > cap)
        {
            if (g.strict)
                throw ConfigError("explicit codebook with " + std::to_string(bits) + " bits exceeds the cap");
            std::cerr << "warning: " << bits << " bits exceeds the explicit cap; using the statistical mode\n";
        }
        Accumulator acc;
        for (int t = 0; t < trials; ++t)
        {
            auto rng = make_stream(seed, StreamTag::distortion, {static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(bits)});
            const auto h = sample_uniform_subspace(m, n, rng);
            if (statistical || bits > cap)
                acc.add(sample_min_distortion(m, n, bits, rng));
            else
                acc.add(quantize_fresh_codebook(h, bits, rng).distance_sq);
        }
        const auto bound = distortion_bound({m, n, bits});
        std::printf("%-6d %14.8f %12.3g %14.8f %14.8f\n", bits, acc.mean, acc.std_err(), bound.first_term, bound.full);
    }
    return exit_ok;
}

int cmd_gap(const std::string &a_path, const std::string &b_path)
{
    const auto a = read_results(a_path);
    const auto b = read_results(b_path);
    const auto g = measure_snr_gap(a, b);
    std::printf("%-10s %10s\n", "snr_b_db", "gap_db");
    for (std::size_t i = 0; i < g.gaps.size(); ++i)
        std::printf("%-10.4g %10.4f\n", g.snr_b[i], g.gaps[i]);
    std::printf("gap_at_highest_rate %.4f\n", g.at_highest_rate);
    std::printf("max_gap %.4f\n", g.max_gap);
    return exit_ok;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Block diagonalization and limited-feedback MIMO broadcast simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalFlags g;
    std::uint64_t seed = 0;
    int trials = 0;
    auto *seed_opt = app.add_option("--seed", seed, "Override the random seed");
    auto *trials_opt = app.add_option("--trials", trials, "Override the number of trials");
    app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
    app.add_flag("--strict", g.strict, "Treat infeasible codebooks and degenerate draws as errors");

    std::string config_path, out_path;
    auto *sim_cmd = app.add_subcommand("simulate", "Run a scenario and write its CSV");
    sim_cmd->add_option("--config", config_path, "Scenario file")->required();
    sim_cmd->add_option("--out", out_path, "Output CSV")->required();

    int m = 0, n = 0;
    std::string pdb_range, scheme = "bd";
    double target_b = 2.0;
    auto *scale_cmd = app.add_subcommand("scaling", "Feedback bits per user for a rate-loss target");
    scale_cmd->add_option("--m", m, "Transmit antennas")->required();
    scale_cmd->add_option("--n", n, "Receive antennas per user")->required();
    scale_cmd->add_option("--pdb-range", pdb_range, "SNR points: start:step:stop or a comma list")->required();
    scale_cmd->add_option("--target-b", target_b, "Allowed rate-loss factor b > 1 (default 2, i.e. 3 dB)");
    scale_cmd->add_option("--scheme", scheme, "bd or zf");

    double rate_target = 1.0, p_db = 15.0;
    auto *cmp_cmd = app.add_subcommand("compare-zf-bd", "Feedback-bit savings of BD over ZF");
    cmp_cmd->add_option("--m", m, "Transmit antennas")->required();
    cmp_cmd->add_option("--n", n, "Receive antennas per user")->required();
    cmp_cmd->add_option("--rate-target", rate_target, "Allowed per-user rate loss in bits")->required();
    cmp_cmd->add_option("--pdb", p_db, "SNR in dB (default 15)");

    std::string bits_range, mode = "explicit";
    int dist_trials = 10000, cap = default_explicit_bits_cap;
    auto *dist_cmd = app.add_subcommand("distortion", "Empirical quantization distortion against the bound");
    dist_cmd->add_option("--m", m, "Transmit antennas")->required();
    dist_cmd->add_option("--n", n, "Subspace dimension")->required();
    dist_cmd->add_option("--bits-range", bits_range, "Bits: start:step:stop or a comma list")->required();
    dist_cmd->add_option("--trials", dist_trials, "Trials per bit value (default 10000)");
    dist_cmd->add_option("--mode", mode, "explicit or statistical");
    dist_cmd->add_option("--cap", cap, "Largest explicit codebook size in bits");

    std::string a_path, b_path;
    auto *gap_cmd = app.add_subcommand("gap", "Horizontal SNR gap of curve a behind curve b");
    gap_cmd->add_option("--a", a_path, "CSV of curve a")->required();
    gap_cmd->add_option("--b", b_path, "CSV of curve b")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return exit_config;
    }
    if (*seed_opt)
        g.seed = seed;
    if (*trials_opt)
        g.trials = trials;

    try
    {
        if (*sim_cmd)
            return cmd_simulate(g, config_path, out_path);
        if (*scale_cmd)
            return cmd_scaling(m, n, pdb_range, target_b, scheme);
        if (*cmp_cmd)
            return cmd_compare(m, n, rate_target, p_db);
        if (*dist_cmd)
            return cmd_distortion(g, m, n, bits_range, g.trials.value_or(dist_trials), mode, cap);
        if (*gap_cmd)
            return cmd_gap(a_path, b_path);
    }
    catch (const DegenerateError &e)
    {
        std::cerr << "degenerate: " << e.what() << '\n';
        return exit_degenerate;
    }
    catch (const CsvError &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return exit_failure;
}
