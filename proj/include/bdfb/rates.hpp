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

#ifndef BDFB_RATES_HPP
#define BDFB_RATES_HPP

#include "channel.hpp"
#include "common.hpp"
#include "precoding.hpp"
#include "subspace.hpp"

#include <algorithm>
#include <cmath>

namespace bdfb
{

/// log2 det(I + scale * gram) for a Hermitian positive semidefinite gram matrix,
/// evaluated through its eigenvalues.
inline double log2_det_identity_plus(const CMatrix &gram, double scale)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
    double acc = 0.0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
        acc += std::log1p(scale * std::max(es.eigenvalues()(i), 0.0));
    return acc / std::log(2.0);
}

/// log2 det(I_N + (P/K) H^H V V^H H) in bits per channel use.
inline double user_rate_perfect(const ChannelMatrix &hc, const CMatrix &v, double power, int k)
{
    require_dims(v.rows() == hc.m(), "user_rate_perfect: precoder/channel row mismatch");
    const CMatrix hv = hc.h.adjoint() * v;
    return log2_det_identity_plus(hv * hv.adjoint(), power / k);
}

struct RateSample
{
    double per_user_rate = 0.0;
    double signal_term = 0.0;       ///< log2 det with all streams (signal plus interference)
    double interference_term = 0.0; ///< log2 det with the other users' streams only
    int user_index = 0;
};

/// Throughput of user i when every precoder may leak into its receiver: the difference of
/// the signal-plus-interference and interference-only log-determinants.
///
/// For ZF sets every receive antenna is decoded on its own, so the same difference is
/// taken per antenna with that antenna's beam as the signal.
inline RateSample user_rate_feedback(const ChannelMatrix &hc, const PrecoderSet &set, int user, double power, int k)
{
    require_dims(user >= 0 && static_cast<std::size_t>(user) < set.users(), "user_rate_feedback: bad user index");
    const double scale = power / k;
    RateSample out;
    out.user_index = user;

    if (set.scheme == Scheme::zf)
    {
        const double ln2 = std::log(2.0);
        for (Index a = 0; a < hc.n(); ++a)
        {
            double total = 0.0, own = 0.0;
            for (std::size_t j = 0; j < set.users(); ++j)
            {
                const auto g = (hc.h.col(a).adjoint() * set.v[j]).eval();
                total += g.squaredNorm();
                if (static_cast<int>(j) == user)
                    own = std::norm(g(0, a));
            }
            const double interference = std::max(total - own, 0.0);
            out.signal_term += std::log1p(scale * total) / ln2;
            out.interference_term += std::log1p(scale * interference) / ln2;
        }
    }
    else
    {
        const Index n = hc.n();
        CMatrix all = CMatrix::Zero(n, n);
        CMatrix others = CMatrix::Zero(n, n);
        for (std::size_t j = 0; j < set.users(); ++j)
        {
            const CMatrix hv = hc.h.adjoint() * set.v[j];
            const CMatrix g = hv * hv.adjoint();
            all += g;
            if (static_cast<int>(j) != user)
                others += g;
        }
        out.signal_term = log2_det_identity_plus(all, scale);
        out.interference_term = log2_det_identity_plus(others, scale);
    }
    out.per_user_rate = out.signal_term - out.interference_term;
    return out;
}

/// Per-user rate loss bound N log2(1 + P D).
inline double rate_loss_bound(int n, double power, double distortion)
{
    if (!(power >= 0.0))
        throw ParameterError("rate_loss_bound: power must be nonnegative");
    if (!(distortion >= 0.0 && distortion <= n))
        throw ParameterError("rate_loss_bound: distortion must lie in [0, n]");
    return n * std::log2(1.0 + power * distortion);
}

/// H_tilde_i^H V_j V_j^H H_tilde_i: the leakage of user j's beams into user i's channel span.
inline CMatrix leakage_statistic(const SubspacePoint &h_tilde, const PrecoderSet &set, int user_i, int user_j)
{
    require_dims(user_i != user_j, "leakage_statistic: requires j != i");
    require_dims(user_j >= 0 && static_cast<std::size_t>(user_j) < set.users(), "leakage_statistic: bad user index");
    const CMatrix hv = h_tilde.basis().adjoint() * set.v[static_cast<std::size_t>(user_j)];
    return hv * hv.adjoint();
}

inline CMatrix leakage_statistic(const ChannelMatrix &hc, const PrecoderSet &set, int user_i, int user_j)
{
    return leakage_statistic(SubspacePoint::span_of(hc.h), set, user_i, user_j);
}

} // namespace bdfb

#endif
