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

#ifndef BDFB_SIM_RUN_HPP
#define BDFB_SIM_RUN_HPP

#include "../channel.hpp"
#include "../precoding.hpp"
#include "../rates.hpp"
#include "../rng.hpp"
#include "../scalar_quant.hpp"
#include "../subspace.hpp"
#include "config.hpp"
#include "gap.hpp"
#include "records.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace bdfb::sim
{

struct RunOptions
{
    int threads = 1;    ///< worker threads; 0 picks the hardware concurrency
    bool strict = false; ///< infeasible codebooks and degenerate draws become errors
    std::function<void(const std::string &)> log; ///< receives notices as they occur
};

/// Mean and standard error by Welford's recurrence.
struct Accumulator
{
    long count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x)
    {
        ++count;
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
    double std_err() const { return count > 1 ? std::sqrt(variance() / static_cast<double>(count)) : 0.0; }
};

/// Per-point quantities that do not fit the CSV schema.
struct PointDiagnostics
{
    double snr_db = 0.0;
    int bits = 0; ///< per quantized direction
    QuantizerKind quantizer = QuantizerKind::perfect;
    double perfect_sum_rate = 0.0;
    double perfect_std_err = 0.0;
    double rate_loss_std_err = 0.0;
    double distortion_std_err = 0.0;
    long distortion_samples = 0;
    double leakage_trace = 0.0; ///< mean of tr(H_i^H V_j V_j^H H_i) over ordered pairs j != i
    double leakage_std_err = 0.0;
    long leakage_samples = 0;
    long fallback_precoders = 0; ///< trials whose quantized feedback was rank deficient
};

struct ScenarioResult
{
    std::vector<RateRecord> records;
    std::vector<PointDiagnostics> points;
    long degenerate_resamples = 0;  ///< redrawn rank-deficient channels
    long fallback_precoders = 0;    ///< least-squares precoders built from rank-deficient feedback
    std::vector<std::string> notices;
};

namespace detail
{

inline constexpr int max_attempts = 64;

struct BitsPlan
{
    int bits = 0;
    QuantizerKind quantizer = QuantizerKind::perfect;
};

struct TrialOut
{
    std::vector<double> sum_feedback; ///< per SNR point
    std::vector<double> sum_perfect;  ///< per SNR point
    std::vector<std::vector<double>> distortion; ///< per distinct bits value
    std::vector<std::vector<double>> leakage;    ///< per distinct bits value
    std::vector<int> fallbacks;                  ///< per distinct bits value
    int resamples = 0;
};

class Runner
{
  public:
    Runner(const ScenarioConfig &cfg, const RunOptions &opts) : cfg_(cfg), opts_(opts)
    {
        cfg_.validate();
        dd_ = cfg_.direction_dim();
        directions_ = cfg_.k * cfg_.directions_per_user();
        point_bits_ = cfg_.bit_rule.bits_for(cfg_.snr_grid_db, cfg_.m, cfg_.n);
        if (cfg_.quantizer == QuantizerKind::perfect)
            std::fill(point_bits_.begin(), point_bits_.end(), 0);

        for (int b : point_bits_)
            if (std::find_if(plans_.begin(), plans_.end(), [&](const BitsPlan &p) { return p.bits == b; }) == plans_.end())
                plans_.push_back({b, resolve(b)});
        for (int b : point_bits_)
            point_plan_.push_back(static_cast<std::size_t>(
                std::find_if(plans_.begin(), plans_.end(), [&](const BitsPlan &p) { return p.bits == b; }) - plans_.begin()));

        prepare_codebooks();
    }

    ScenarioResult run()
    {
        const auto trials = static_cast<std::size_t>(cfg_.trials);
        std::vector<TrialOut> outs(trials);
        int threads = opts_.threads > 0 ? opts_.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        threads = std::min<int>(threads, cfg_.trials);

        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&]() {
            for (;;)
            {
                const std::size_t t = next.fetch_add(1);
                if (t >= trials)
                    return;
                try
                {
                    outs[t] = run_trial(t);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(trials);
                    return;
                }
            }
        };
        if (threads <= 1)
            worker();
        else
        {
            std::vector<std::thread> pool;
            for (int i = 0; i < threads; ++i)
                pool.emplace_back(worker);
            for (auto &th : pool)
                th.join();
        }
        if (error)
            std::rethrow_exception(error);
        return reduce(outs);
    }

  private:
    ScenarioConfig cfg_;
    RunOptions opts_;
    int dd_ = 1;
    int directions_ = 0;
    std::vector<int> point_bits_;
    std::vector<BitsPlan> plans_;
    std::vector<std::size_t> point_plan_;
    std::map<std::pair<std::size_t, int>, Codebook> codebooks_; ///< fixed mode: (plan, direction * cpt + c)
    std::map<std::pair<std::size_t, int>, ScalarCodec> codecs_; ///< (plan, direction)
    std::vector<std::string> notices_;

    void notice(const std::string &s)
    {
        notices_.push_back(s);
        if (opts_.log)
            opts_.log(s);
    }

    QuantizerKind resolve(int bits)
    {
        if (cfg_.quantizer != QuantizerKind::rvq_explicit || bits <= cfg_.explicit_bits_cap)
            return cfg_.quantizer;
        const std::string what = "explicit codebook with " + std::to_string(bits) + " bits exceeds the cap of " +
                                 std::to_string(cfg_.explicit_bits_cap);
        if (opts_.strict)
            throw ConfigError(what);
        if (cfg_.m < 2 * dd_)
            throw ConfigError(what + " and the statistical mode needs m >= 2n");
        notice("warning: " + what + "; using rvq_statistical at this point");
        return QuantizerKind::rvq_statistical;
    }

    void prepare_codebooks()
    {
        for (std::size_t p = 0; p < plans_.size(); ++p)
        {
            const int b = plans_[p].bits;
            if (plans_[p].quantizer == QuantizerKind::rvq_explicit && cfg_.codebook_mode == CodebookMode::fixed)
                for (int d = 0; d < directions_; ++d)
                    for (int c = 0; c < cfg_.codebooks_per_trial; ++c)
                    {
                        auto rng = make_stream(cfg_.seed, StreamTag::codebook,
                                               {~std::uint64_t{0}, static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(b),
                                                static_cast<std::uint64_t>(c)});
                        codebooks_.emplace(std::pair{p, d * cfg_.codebooks_per_trial + c},
                                           random_codebook(cfg_.m, dd_, b, rng, cfg_.explicit_bits_cap));
                    }
            if (plans_[p].quantizer == QuantizerKind::scalar)
                for (int d = 0; d < directions_; ++d)
                {
                    auto rng = make_stream(cfg_.seed, StreamTag::scalar_allocation,
                                           {static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(b)});
                    codecs_.emplace(std::pair{p, d}, allocate_bits(cfg_.m, dd_, b, rng));
                }
        }
    }

    /// Raw channel matrix behind quantized direction d.
    CMatrix direction_matrix(const std::vector<ChannelMatrix> &ch, int d) const
    {
        if (cfg_.scheme == Scheme::bd)
            return ch[static_cast<std::size_t>(d)].h;
        return ch[static_cast<std::size_t>(d / cfg_.n)].h.col(d % cfg_.n);
    }

    SubspacePoint quantize_direction(const CMatrix &raw, const SubspacePoint &dir, std::size_t plan, int d, int c,
                                     std::uint64_t trial, int attempt) const
    {
        const int b = plans_[plan].bits;
        const std::initializer_list<std::uint64_t> keys = {trial, static_cast<std::uint64_t>(attempt), static_cast<std::uint64_t>(d),
                                                           static_cast<std::uint64_t>(b), static_cast<std::uint64_t>(c)};
        switch (plans_[plan].quantizer)
        {
        case QuantizerKind::perfect:
            return dir;
        case QuantizerKind::rvq_explicit:
            if (cfg_.codebook_mode == CodebookMode::fixed)
                return quantize(dir, codebooks_.at({plan, d * cfg_.codebooks_per_trial + c})).point;
            else
            {
                auto rng = make_stream(cfg_.seed, StreamTag::codebook, keys);
                return quantize_fresh_codebook(dir, b, rng).point;
            }
        case QuantizerKind::rvq_statistical:
        {
            auto rng = make_stream(cfg_.seed, StreamTag::distortion, keys);
            const double d2 = sample_min_distortion(cfg_.m, dd_, b, rng);
            return apply_quantization_error(dir, d2, rng, cfg_.angle_split);
        }
        case QuantizerKind::scalar:
            return quantize_scalar(raw, codecs_.at({plan, d}), cfg_.scalar_reference);
        }
        return dir;
    }

    PrecoderSet precoders_from(const std::vector<SubspacePoint> &dirs) const
    {
        const RankPolicy policy = opts_.strict ? RankPolicy::strict : RankPolicy::least_squares;
        if (cfg_.scheme == Scheme::bd)
            return bd_precoders(dirs, cfg_.m, cfg_.n, policy);
        CMatrix agg(cfg_.m, directions_);
        for (int d = 0; d < directions_; ++d)
            agg.col(d) = dirs[static_cast<std::size_t>(d)].basis();
        return zf_precoders_from_aggregate(agg, cfg_.n, policy);
    }

    /// Sum over users of the per-user rate at linear power p.
    double sum_rate(const std::vector<ChannelMatrix> &ch, const PrecoderSet &set, double p, bool perfect_bd) const
    {
        double s = 0.0;
        for (int u = 0; u < cfg_.k; ++u)
        {
            const auto &hc = ch[static_cast<std::size_t>(u)];
            s += perfect_bd ? user_rate_perfect(hc, set.v[static_cast<std::size_t>(u)], p, cfg_.k)
                            : user_rate_feedback(hc, set, u, p, cfg_.k).per_user_rate;
        }
        return s;
    }

    TrialOut run_trial(std::size_t t)
    {
        TrialOut out;
        for (int attempt = 0;; ++attempt)
        {
            if (attempt == max_attempts)
                throw DegenerateError("run_scenario: trial " + std::to_string(t) + " stayed degenerate after resampling");
            try
            {
                out = attempt_trial(t, attempt);
                out.resamples = attempt;
                return out;
            }
            catch (const DegenerateError &)
            {
                if (opts_.strict)
                    throw;
            }
        }
    }

    TrialOut attempt_trial(std::size_t t, int attempt) const
    {
        const auto trial = static_cast<std::uint64_t>(t);
        const std::size_t points = cfg_.snr_grid_db.size();
        std::vector<ChannelMatrix> ch;
        ch.reserve(static_cast<std::size_t>(cfg_.k));
        for (int u = 0; u < cfg_.k; ++u)
        {
            auto rng = make_stream(cfg_.seed, StreamTag::channel,
                                   {trial, static_cast<std::uint64_t>(attempt), static_cast<std::uint64_t>(u)});
            ch.push_back(sample_channel(cfg_.m, cfg_.n, u, rng));
            if (smallest_singular_value(ch.back().h) < degenerate_sigma)
                throw DegenerateError("run_scenario: rank-deficient channel draw");
        }
        std::vector<CMatrix> raw;
        std::vector<SubspacePoint> dirs;
        for (int d = 0; d < directions_; ++d)
        {
            raw.push_back(direction_matrix(ch, d));
            dirs.push_back(SubspacePoint::span_of(raw.back()));
        }
        std::vector<SubspacePoint> user_span;
        for (const auto &hc : ch)
            user_span.push_back(SubspacePoint::span_of(hc.h));

        const PrecoderSet perfect = cfg_.scheme == Scheme::bd ? bd_precoders(dirs, cfg_.m, cfg_.n) : zf_precoders(ch, cfg_.m, cfg_.n);
        const bool perfect_bd = cfg_.scheme == Scheme::bd;

        TrialOut out;
        out.sum_perfect.resize(points);
        out.sum_feedback.assign(points, 0.0);
        out.distortion.resize(plans_.size());
        out.leakage.resize(plans_.size());
        out.fallbacks.assign(plans_.size(), 0);
        for (std::size_t i = 0; i < points; ++i)
            out.sum_perfect[i] = sum_rate(ch, perfect, db_to_linear(cfg_.snr_grid_db[i]), perfect_bd);

        const int cpt = cfg_.quantizer == QuantizerKind::perfect ? 1 : cfg_.codebooks_per_trial;
        for (std::size_t p = 0; p < plans_.size(); ++p)
            for (int c = 0; c < cpt; ++c)
            {
                std::vector<SubspacePoint> q;
                q.reserve(dirs.size());
                for (int d = 0; d < directions_; ++d)
                {
                    q.push_back(quantize_direction(raw[static_cast<std::size_t>(d)], dirs[static_cast<std::size_t>(d)], p, d, c, trial, attempt));
                    out.distortion[p].push_back(
                        plans_[p].quantizer == QuantizerKind::perfect ? 0.0 : chordal_distance_sq(dirs[static_cast<std::size_t>(d)], q.back()));
                }
                const bool exact = plans_[p].quantizer == QuantizerKind::perfect;
                const PrecoderSet set = exact ? perfect : precoders_from(q);
                out.fallbacks[p] += set.rank_deficient ? 1 : 0;
                for (int i = 0; i < cfg_.k; ++i)
                    for (int j = 0; j < cfg_.k; ++j)
                        if (i != j)
                            out.leakage[p].push_back(leakage_statistic(user_span[static_cast<std::size_t>(i)], set, i, j).trace().real());
                for (std::size_t i = 0; i < points; ++i)
                {
                    if (point_plan_[i] != p)
                        continue;
                    out.sum_feedback[i] += exact ? out.sum_perfect[i]
                                                 : sum_rate(ch, set, db_to_linear(cfg_.snr_grid_db[i]), false) / cpt;
                }
            }
        return out;
    }

    ScenarioResult reduce(const std::vector<TrialOut> &outs)
    {
        const std::size_t points = cfg_.snr_grid_db.size();
        std::vector<Accumulator> fb(points), perf(points), loss(points);
        std::vector<Accumulator> dist(plans_.size()), leak(plans_.size());
        std::vector<long> fallbacks(plans_.size(), 0);
        ScenarioResult res;
        for (const auto &o : outs)
        {
            res.degenerate_resamples += o.resamples;
            for (std::size_t i = 0; i < points; ++i)
            {
                fb[i].add(o.sum_feedback[i]);
                perf[i].add(o.sum_perfect[i]);
                loss[i].add((o.sum_perfect[i] - o.sum_feedback[i]) / cfg_.k);
            }
            for (std::size_t p = 0; p < plans_.size(); ++p)
            {
                for (double x : o.distortion[p])
                    dist[p].add(x);
                for (double x : o.leakage[p])
                    leak[p].add(x);
                fallbacks[p] += o.fallbacks[p];
            }
        }
        if (res.degenerate_resamples > 0)
            notice("resampled " + std::to_string(res.degenerate_resamples) + " rank-deficient channel draws");
        for (std::size_t p = 0; p < plans_.size(); ++p)
        {
            res.fallback_precoders += fallbacks[p];
            if (fallbacks[p] > 0)
                notice("rank-deficient feedback at " + std::to_string(plans_[p].bits) + " bits in " + std::to_string(fallbacks[p]) +
                       " evaluations; used least-squares precoders");
        }

        const int dpu = cfg_.directions_per_user();
        for (std::size_t i = 0; i < points; ++i)
        {
            const std::size_t p = point_plan_[i];
            const auto &plan = plans_[p];
            const double power = db_to_linear(cfg_.snr_grid_db[i]);
            const bool exact = plan.quantizer == QuantizerKind::perfect;
            const double d_hat = std::clamp(dist[p].mean, 0.0, static_cast<double>(dd_));

            RateRecord r;
            r.scenario_id = cfg_.scenario_id;
            r.scheme = to_string(cfg_.scheme);
            r.quantizer = to_string(plan.quantizer);
            r.m = cfg_.m;
            r.n = cfg_.n;
            r.k = cfg_.k;
            r.snr_db = cfg_.snr_grid_db[i];
            r.bits_per_user = plan.bits * dpu;
            r.trials = cfg_.trials;
            r.sum_rate = fb[i].mean;
            r.per_user_rate = fb[i].mean / cfg_.k;
            r.rate_loss = loss[i].mean;
            r.theorem1_bound = exact ? 0.0 : rate_loss_bound(cfg_.n, power, d_hat);
            r.empirical_distortion = exact ? 0.0 : d_hat;
            r.distortion_bound = exact ? 0.0 : distortion_bound({cfg_.m, dd_, plan.bits, cfg_.distortion_a}).full;
            r.std_err = fb[i].std_err();
            res.records.push_back(r);

            PointDiagnostics pd;
            pd.snr_db = r.snr_db;
            pd.bits = plan.bits;
            pd.quantizer = plan.quantizer;
            pd.perfect_sum_rate = perf[i].mean;
            pd.perfect_std_err = perf[i].std_err();
            pd.rate_loss_std_err = loss[i].std_err();
            pd.distortion_std_err = dist[p].std_err();
            pd.distortion_samples = dist[p].count;
            pd.leakage_trace = leak[p].mean;
            pd.leakage_std_err = leak[p].std_err();
            pd.leakage_samples = leak[p].count;
            pd.fallback_precoders = fallbacks[p];
            res.points.push_back(pd);
        }
        res.notices = notices_;
        return res;
    }
};

} // namespace detail

/// Monte Carlo evaluation of one scenario. Trial t draws its channels and quantizers from
/// substreams keyed by (seed, t, user), the same draws serve every SNR point, and the
/// reduction runs in trial order, so the output does not depend on the thread count.
inline ScenarioResult run_scenario(const ScenarioConfig &cfg, const RunOptions &opts = {})
{
    detail::Runner runner(cfg, opts);
    return runner.run();
}

/// Perfect-CSIT sum-rate curve computed alongside a scenario.
inline RateCurve perfect_curve(const ScenarioResult &r)
{
    RateCurve c;
    for (const auto &p : r.points)
    {
        c.snr_db.push_back(p.snr_db);
        c.rate.push_back(p.perfect_sum_rate);
    }
    return c;
}

} // namespace bdfb::sim

#endif
