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

#ifndef BDFB_SIM_GAP_HPP
#define BDFB_SIM_GAP_HPP

#include "records.hpp"

#include <algorithm>
#include <vector>

namespace bdfb::sim
{

/// Sum rate against SNR, ordered by SNR.
struct RateCurve
{
    std::vector<double> snr_db;
    std::vector<double> rate;
};

inline RateCurve curve_of(const std::vector<RateRecord> &records)
{
    std::vector<RateRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) { return a.snr_db < b.snr_db; });
    RateCurve c;
    for (const auto &r : sorted)
    {
        c.snr_db.push_back(r.snr_db);
        c.rate.push_back(r.sum_rate);
    }
    return c;
}

struct SnrGap
{
    double at_highest_rate = 0.0; ///< gap at the largest rate of b inside a's range
    double max_gap = 0.0;
    std::vector<double> snr_b; ///< points of b that were inside a's range
    std::vector<double> gaps;  ///< SNR_a(rate_b) - SNR_b at those points, dB
};

/// Horizontal distance: for every rate reached by curve b, the extra SNR in dB that curve a
/// needs to reach it, with piecewise-linear interpolation of a in the dB domain.
inline SnrGap measure_snr_gap(const RateCurve &a, const RateCurve &b)
{
    for (const RateCurve *c : {&a, &b})
    {
        if (c->snr_db.size() != c->rate.size() || c->snr_db.empty())
            throw ParameterError("measure_snr_gap: curves need matching, nonempty SNR and rate lists");
        for (std::size_t i = 1; i < c->snr_db.size(); ++i)
            if (!(c->snr_db[i] > c->snr_db[i - 1]))
                throw ParameterError("measure_snr_gap: SNR points must be strictly increasing");
    }
    for (std::size_t i = 1; i < a.rate.size(); ++i)
        if (!(a.rate[i] > a.rate[i - 1]))
            throw ParameterError("measure_snr_gap: curve a must be increasing in SNR");
    for (std::size_t i = 1; i < b.rate.size(); ++i)
        if (b.rate[i] < b.rate[i - 1])
            throw ParameterError("measure_snr_gap: curve b must be nondecreasing in SNR");

    SnrGap out;
    const double lo = a.rate.front(), hi = a.rate.back();
    for (std::size_t i = 0; i < b.rate.size(); ++i)
    {
        const double r = b.rate[i];
        if (r < lo || r > hi)
            continue;
        double snr_a = a.snr_db.back();
        const auto it = std::lower_bound(a.rate.begin(), a.rate.end(), r);
        const auto j = static_cast<std::size_t>(it - a.rate.begin());
        if (j == 0)
            snr_a = a.snr_db.front();
        else if (j < a.rate.size())
        {
            const double w = (r - a.rate[j - 1]) / (a.rate[j] - a.rate[j - 1]);
            snr_a = a.snr_db[j - 1] + w * (a.snr_db[j] - a.snr_db[j - 1]);
        }
        out.snr_b.push_back(b.snr_db[i]);
        out.gaps.push_back(snr_a - b.snr_db[i]);
    }
    if (out.gaps.empty())
        throw ParameterError("measure_snr_gap: the rate ranges of the two curves do not overlap");
    out.at_highest_rate = out.gaps.back();
    out.max_gap = *std::max_element(out.gaps.begin(), out.gaps.end());
    return out;
}

inline SnrGap measure_snr_gap(const std::vector<RateRecord> &a, const std::vector<RateRecord> &b)
{
    return measure_snr_gap(curve_of(a), curve_of(b));
}

} // namespace bdfb::sim

#endif
