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

#ifndef BDFB_PRECODING_HPP
#define BDFB_PRECODING_HPP

#include "channel.hpp"
#include "common.hpp"
#include "subspace.hpp"

#include <string>
#include <vector>

namespace bdfb
{

enum class Scheme
{
    bd,
    zf,
};

inline std::string to_string(Scheme s) { return s == Scheme::bd ? "BD" : "ZF"; }

/// One M x N precoder per user. BD precoders have orthonormal columns; ZF precoders
/// have unit-norm columns (one beam per receive antenna) that are generally not orthogonal.
struct PrecoderSet
{
    std::vector<CMatrix> v;
    Scheme scheme = Scheme::bd;
    bool rank_deficient = false; ///< built by the least-squares fallback

    std::size_t users() const { return v.size(); }
};

/// Relative threshold on singular values for the numerical rank decision.
inline constexpr double null_space_rel_tol = 1e-10;

/// What to do when the directions do not determine the precoders uniquely.
enum class RankPolicy
{
    strict,        ///< throw DegenerateError
    least_squares, ///< BD: the n weakest right-singular vectors; ZF: pseudo-inverse beams
};

/// Block diagonalization: V_i is an orthonormal basis of the null space of the stacked
/// G_j^H, j != i.
inline PrecoderSet bd_precoders(const std::vector<SubspacePoint> &directions, Index m, Index n,
                               RankPolicy policy = RankPolicy::strict)
{
    const auto k = static_cast<Index>(directions.size());
    if (k < 2 || k * n != m)
        throw DimensionError("bd_precoders: requires K >= 2 users with K * n == m");
    for (const auto &g : directions)
        require_dims(g.m() == m && g.n() == n, "bd_precoders: direction has wrong dimensions");

    PrecoderSet out;
    out.scheme = Scheme::bd;
    out.v.reserve(directions.size());
    CMatrix stacked(m - n, m);
    for (Index i = 0; i < k; ++i)
    {
        Index row = 0;
        for (Index j = 0; j < k; ++j)
        {
            if (j == i)
                continue;
            stacked.middleRows(row, n) = directions[static_cast<std::size_t>(j)].basis().adjoint();
            row += n;
        }
        Eigen::JacobiSVD<CMatrix> svd(stacked, Eigen::ComputeFullV);
        const auto &sv = svd.singularValues();
        const double tol = null_space_rel_tol * sv(0);
        Index rank = 0;
        while (rank < sv.size() && sv(rank) > tol)
            ++rank;
        if (m - rank != n)
        {
            if (policy == RankPolicy::strict)
                throw DegenerateError("bd_precoders: null space dimension exceeds n (degenerate directions)");
            out.rank_deficient = true;
        }
        out.v.push_back(svd.matrixV().rightCols(n));
    }
    return out;
}

/// Zero forcing on an M x M aggregate of receive-antenna directions: beam l is the
/// normalized l-th column of aggregate^{-H}, orthogonal to every other column.
/// Columns are grouped n per user in order.
inline PrecoderSet zf_precoders_from_aggregate(const CMatrix &aggregate, Index n, RankPolicy policy = RankPolicy::strict)
{
    const Index m = aggregate.rows();
    if (aggregate.cols() != m || n < 1 || m % n != 0 || m / n < 2)
        throw DimensionError("zf_precoders: aggregate must be M x M with M = K n, K >= 2");
    Eigen::JacobiSVD<CMatrix> svd(aggregate);
    const auto &sv = svd.singularValues();
    PrecoderSet out;
    out.scheme = Scheme::zf;
    CMatrix w;
    if (sv(m - 1) > 1e-12 * sv(0))
        w = aggregate.adjoint().fullPivLu().inverse();
    else
    {
        if (policy == RankPolicy::strict)
            throw DegenerateError("zf_precoders: aggregate channel is singular");
        auto cod = aggregate.adjoint().completeOrthogonalDecomposition();
        cod.setThreshold(null_space_rel_tol);
        w = cod.pseudoInverse();
        out.rank_deficient = true;
    }
    for (Index c = 0; c < m; ++c)
    {
        const double norm = w.col(c).norm();
        if (!(norm > 0.0))
            throw DegenerateError("zf_precoders: zero beam");
        w.col(c) /= norm;
    }
    for (Index u = 0; u < m / n; ++u)
        out.v.push_back(w.middleCols(u * n, n));
    return out;
}

inline CMatrix aggregate_channel(const std::vector<ChannelMatrix> &channels)
{
    require_dims(!channels.empty(), "aggregate_channel: no users");
    const Index m = channels.front().m(), n = channels.front().n();
    CMatrix agg(m, n * static_cast<Index>(channels.size()));
    for (std::size_t u = 0; u < channels.size(); ++u)
    {
        require_dims(channels[u].m() == m && channels[u].n() == n, "aggregate_channel: mixed dimensions");
        agg.middleCols(static_cast<Index>(u) * n, n) = channels[u].h;
    }
    return agg;
}

inline PrecoderSet zf_precoders(const std::vector<ChannelMatrix> &channels, Index m, Index n)
{
    if (static_cast<Index>(channels.size()) * n != m)
        throw DimensionError("zf_precoders: requires K * n == m");
    for (const auto &c : channels)
        require_dims(c.m() == m && c.n() == n, "zf_precoders: channel has wrong dimensions");
    return zf_precoders_from_aggregate(aggregate_channel(channels), n);
}

/// Expected transmit power E||x||^2 for x = sqrt(P/K) sum V_i s_i with E[s_i s_i^H] = I_N / N
/// (unit-power symbol vectors). Equals P for any set of unit-norm-column precoders.
inline double transmit_power(const PrecoderSet &set, double power)
{
    const auto k = static_cast<double>(set.users());
    double tr = 0.0;
    for (const auto &v : set.v)
        tr += v.squaredNorm() / static_cast<double>(v.cols());
    return power / k * tr;
}

} // namespace bdfb

#endif
