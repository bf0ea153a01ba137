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

#ifndef BDFB_SCALING_HPP
#define BDFB_SCALING_HPP

#include "common.hpp"
#include "precoding.hpp"
#include "subspace.hpp"

#include <cmath>

namespace bdfb
{

struct ScalingQuery
{
    int m = 0;
    int n = 0;
    double p_db = 0.0;
    double b_target = 2.0; ///< tolerated per-user rate loss is log2(b_target) bits
    Scheme scheme = Scheme::bd;

    /// ZF treats every receive antenna as a single-antenna user.
    int effective_n() const { return scheme == Scheme::zf ? 1 : n; }
};

namespace detail
{
inline void check_query(const ScalingQuery &q)
{
    if (q.effective_n() < 1 || q.m <= q.effective_n())
        throw DimensionError("scaling: requires m > n >= 1");
    if (!std::isfinite(q.p_db))
        throw ParameterError("scaling: p_db must be finite");
    if (!(q.b_target > 1.0))
        throw ParameterError("scaling: b_target must exceed 1");
}
} // namespace detail

/// Closed-form sufficient bits per user for a rate loss of at most log2(b):
///   T/3 P_dB - T log2(b^(1/N) - 1) + T log2(Gamma(1/T)/T) - log2 C_MN,   T = N(M-N).
/// The dB slope uses the customary 3 dB per doubling. Not rounded.
inline double bits_for_rate_loss(const ScalingQuery &q)
{
    detail::check_query(q);
    const int n = q.effective_n();
    const double t = grassmann_exponent(q.m, n);
    const double gamma_term = (std::lgamma(1.0 / t) - std::log(t)) / std::log(2.0);
    return t / 3.0 * q.p_db - t * std::log2(std::pow(q.b_target, 1.0 / n) - 1.0) + t * gamma_term -
           log_c_mn(q.m, n) / std::log(2.0);
}

/// Solves N log2(1 + P * D_first(B)) = log2(b) for B by bisection (1e-6 bits), with the exact
/// dB conversion and the dominant term of the distortion bound.
inline double bits_for_rate_loss_exact(const ScalingQuery &q)
{
    detail::check_query(q);
    const int n = q.effective_n();
    const double power = db_to_linear(q.p_db);
    const double target = std::log2(q.b_target);
    auto excess = [&](double bits) {
        const double t = grassmann_exponent(q.m, n);
        const double d = std::exp(std::lgamma(1.0 / t) - std::log(t) - log_c_mn(q.m, n) / t - bits * std::log(2.0) / t);
        return n * std::log2(1.0 + power * d) - target;
    };
    // excess() is strictly decreasing in B.
    double lo = bits_for_rate_loss(q) - 16.0, hi = lo + 32.0;
    while (excess(lo) < 0.0)
        lo -= 32.0;
    while (excess(hi) > 0.0)
        hi += 32.0;
    while (hi - lo > 1e-6)
    {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Bits per user that keep BD within about 3 dB of perfect CSIT: N(M-N)/3 P_dB - log2 C_MN.
inline double bits_3db_bd(int m, int n, double p_db)
{
    return grassmann_exponent(m, n) / 3.0 * p_db - log_c_mn(m, n) / std::log(2.0);
}

/// Bits per single-antenna user that keep ZF within about 3 dB: (M-1)/3 P_dB.
inline double bits_3db_zf(int m, double p_db)
{
    if (m < 2)
        throw DimensionError("bits_3db_zf: requires m >= 2");
    return (m - 1) / 3.0 * p_db;
}

/// High-SNR sum-rate advantage of BD over ZF under perfect CSIT:
/// K log2(e) sum_{j=1..N} (N-j)/j.
inline double bd_zf_rate_gap(int m, int n, int k)
{
    if (n < 1 || k * n != m)
        throw DimensionError("bd_zf_rate_gap: requires k * n == m");
    double s = 0.0;
    for (int j = 1; j <= n; ++j)
        s += static_cast<double>(n - j) / j;
    return k * s / std::log(2.0);
}

struct BitComparison
{
    double zf_bits_total = 0.0;     ///< N times the per-antenna ZF bits
    double bd_bits = 0.0;           ///< BD bits per user at the matched sum rate
    double rate_gap_per_user = 0.0; ///< perfect-CSIT BD advantage per user
    double b = 0.0;                 ///< 2^(gap per user + r_target) fed to the BD law
    double savings_percent = 0.0;   ///< 100 (1 - bd / zf)
};

/// Bits BD needs to match the sum rate of ZF that loses r_target bits per antenna.
/// Both sides use the closed-form sufficient law (ZF as the single-antenna instance).
inline BitComparison compare_bd_zf_bits(int m, int n, double p_db, double r_target)
{
    if (!(r_target > 0.0))
        throw ParameterError("compare_bd_zf_bits: r_target must be positive");
    if (n < 1 || m % n != 0 || m / n < 2)
        throw DimensionError("compare_bd_zf_bits: requires m = K n with K >= 2");
    const int k = m / n;
    BitComparison out;
    out.zf_bits_total = n * bits_for_rate_loss({m, 1, p_db, std::exp2(r_target), Scheme::zf});
    out.rate_gap_per_user = bd_zf_rate_gap(m, n, k) / k;
    out.b = std::exp2(out.rate_gap_per_user + r_target);
    out.bd_bits = bits_for_rate_loss({m, n, p_db, out.b, Scheme::bd});
    out.savings_percent = 100.0 * (1.0 - out.bd_bits / out.zf_bits_total);
    return out;
}

} // namespace bdfb

#endif
