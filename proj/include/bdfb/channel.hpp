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

#ifndef BDFB_CHANNEL_HPP
#define BDFB_CHANNEL_HPP

#include "common.hpp"
#include "rng.hpp"
#include "subspace.hpp"

#include <vector>

namespace bdfb
{

/// Channel from the M transmit antennas to one N-antenna user (y = H^H x + n).
struct ChannelMatrix
{
    CMatrix h;
    int user_index = 0;

    Index m() const { return h.rows(); }
    Index n() const { return h.cols(); }
};

/// H H^H = H_tilde diag(lambda) H_tilde^H.
struct ChannelFactorization
{
    SubspacePoint h_tilde;
    std::vector<double> lambda;
};

/// Smallest singular value below which a channel is treated as rank deficient.
inline constexpr double degenerate_sigma = 1e-12;

/// One block-fading Rayleigh draw: i.i.d. CN(0, 1) entries.
inline ChannelMatrix sample_channel(Index m, Index n, int user_index, Engine &rng)
{
    if (n < 1 || m < n)
        throw DimensionError("sample_channel: requires m >= n >= 1");
    return {complex_gaussian_matrix(m, n, rng), user_index};
}

inline double smallest_singular_value(const CMatrix &h)
{
    Eigen::JacobiSVD<CMatrix> svd(h);
    return svd.singularValues().minCoeff();
}

/// Span basis and the N nonzero eigenvalues of H H^H.
///
/// The eigenpairs are not sorted. They are cyclically rotated by the index of the
/// strongest column of H; under the i.i.d. model that index is uniform and independent
/// of the eigenvalues, so every position has the same marginal law (mean M).
inline ChannelFactorization factorize(const ChannelMatrix &hc)
{
    const Index n = hc.n();
    Eigen::JacobiSVD<CMatrix> svd(hc.h, Eigen::ComputeThinU);
    const auto &sv = svd.singularValues();
    if (sv.size() != n || !(sv(n - 1) >= degenerate_sigma))
        throw DegenerateError("factorize: channel is numerically rank deficient");

    Index shift = 0;
    hc.h.colwise().squaredNorm().maxCoeff(&shift);

    CMatrix basis(hc.m(), n);
    std::vector<double> lambda(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k)
    {
        const Index src = (k + shift) % n;
        basis.col(k) = svd.matrixU().col(src);
        lambda[static_cast<std::size_t>(k)] = sv(src) * sv(src);
    }
    return {SubspacePoint::from_orthonormal(std::move(basis)), std::move(lambda)};
}

} // namespace bdfb

#endif
