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

#ifndef BDFB_SCALAR_QUANT_HPP
#define BDFB_SCALAR_QUANT_HPP

#include "channel.hpp"
#include "common.hpp"
#include "rng.hpp"
#include "subspace.hpp"

#include <boost/random/uniform_int_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace bdfb
{

/// Per-element bit budget of the scalar quantizer. Entry e of the quantized block
/// (column-major over the M - N non-reference rows) gets phase_bits[e] bits for its phase
/// and magnitude_bits[e] bits for the arctangent of its magnitude.
struct ScalarCodec
{
    int m = 0;
    int n = 0;
    int total_bits = 0;
    std::vector<int> phase_bits;
    std::vector<int> magnitude_bits;

    std::size_t elements() const { return phase_bits.size(); }
};

/// Splits total_bits as evenly as possible over the 2 (M-N) N phase and magnitude slots;
/// the remainder goes to distinct slots drawn uniformly from `rng`.
inline ScalarCodec allocate_bits(int m, int n, int total_bits, Engine &rng)
{
    if (n < 1 || m <= n)
        throw DimensionError("allocate_bits: requires m > n >= 1");
    if (total_bits < 0)
        throw ParameterError("allocate_bits: total_bits must be nonnegative");
    const int elements = (m - n) * n;
    const int slots = 2 * elements;
    std::vector<int> bits(static_cast<std::size_t>(slots), total_bits / slots);

    std::vector<int> order(static_cast<std::size_t>(slots));
    std::iota(order.begin(), order.end(), 0);
    const int leftover = total_bits % slots;
    for (int i = 0; i < leftover; ++i)
    {
        boost::random::uniform_int_distribution<int> pick(i, slots - 1);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
        ++bits[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    }

    ScalarCodec codec;
    codec.m = m;
    codec.n = n;
    codec.total_bits = total_bits;
    codec.phase_bits.assign(bits.begin(), bits.begin() + elements);
    codec.magnitude_bits.assign(bits.begin() + elements, bits.end());
    return codec;
}

/// Uniform quantizer on [-pi, pi) with wraparound; reconstructs at bin centers.
inline double quantize_phase(double phi, int bits)
{
    const double levels = std::ldexp(1.0, bits);
    const double width = 2.0 * pi / levels;
    double idx = std::floor((phi + pi) / width);
    if (idx >= levels || idx < 0.0)
        idx = 0.0;
    return -pi + (idx + 0.5) * width;
}

/// Uniform quantizer on [0, pi/2]; reconstructs at bin centers.
inline double quantize_angle(double alpha, int bits)
{
    const double levels = std::ldexp(1.0, bits);
    const double width = 0.5 * pi / levels;
    const double idx = std::clamp(std::floor(alpha / width), 0.0, levels - 1.0);
    return (idx + 0.5) * width;
}

enum class ReferenceMode
{
    strongest, ///< greedy best-conditioned reference rows (largest element for MISO)
    literal,   ///< the first N rows, falling back to `strongest` when singular
};

/// Bits needed to signal which rows serve as reference: ceil(log2 binom(M, N)).
/// Reported separately, not charged against the quantizer budget.
inline int reference_index_bits(int m, int n)
{
    double ln_binom = std::lgamma(m + 1.0) - std::lgamma(n + 1.0) - std::lgamma(m - n + 1.0);
    return static_cast<int>(std::ceil(ln_binom / std::log(2.0) - 1e-9));
}

/// Reference rows for the ratio matrix H (H_ref)^{-1}. In `strongest` mode rows are chosen
/// greedily by residual norm of the orthonormal basis rows, which depends only on span(H).
inline std::vector<Index> select_reference_rows(const CMatrix &h, ReferenceMode mode)
{
    const Index m = h.rows(), n = h.cols();
    const CMatrix q = orthonormalize(h);

    if (mode == ReferenceMode::literal)
    {
        Eigen::JacobiSVD<CMatrix> svd(q.topRows(n));
        const auto &sv = svd.singularValues();
        if (sv(n - 1) > 1e-8 * std::max(sv(0), 1e-300))
        {
            std::vector<Index> rows(static_cast<std::size_t>(n));
            std::iota(rows.begin(), rows.end(), Index{0});
            return rows;
        }
    }

    CMatrix r = q.transpose(); // column i is row i of q
    std::vector<Index> rows;
    std::vector<bool> used(static_cast<std::size_t>(m), false);
    for (Index k = 0; k < n; ++k)
    {
        Index best = -1;
        double best_norm = -1.0;
        for (Index i = 0; i < m; ++i)
        {
            if (used[static_cast<std::size_t>(i)])
                continue;
            const double s = r.col(i).squaredNorm();
            if (s > best_norm)
            {
                best_norm = s;
                best = i;
            }
        }
        if (!(best_norm > 0.0))
            throw DegenerateError("select_reference_rows: channel is rank deficient");
        used[static_cast<std::size_t>(best)] = true;
        rows.push_back(best);
        const CVector p = r.col(best) / std::sqrt(best_norm);
        for (Index i = 0; i < m; ++i)
            if (!used[static_cast<std::size_t>(i)])
                r.col(i) -= p * p.dot(r.col(i));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

/// Scalar quantization of span(H): form G = H (H_ref)^{-1}, whose reference rows are the
/// identity, quantize phase and arctan-magnitude of every other entry, rebuild and
/// orthonormalize.
inline SubspacePoint quantize_scalar(const CMatrix &h, const ScalarCodec &codec, ReferenceMode mode = ReferenceMode::strongest)
{
    const Index m = h.rows(), n = h.cols();
    require_dims(m == codec.m && n == codec.n, "quantize_scalar: codec dimensions differ from channel");
    require_dims(static_cast<Index>(codec.elements()) == (m - n) * n, "quantize_scalar: malformed codec");

    const auto ref = select_reference_rows(h, mode);
    CMatrix top(n, n);
    for (Index k = 0; k < n; ++k)
        top.row(k) = h.row(ref[static_cast<std::size_t>(k)]);
    const auto lu = top.fullPivLu();
    if (!lu.isInvertible())
        throw DegenerateError("quantize_scalar: reference block is singular");
    const CMatrix g = h * lu.inverse();

    CMatrix g_hat = CMatrix::Zero(m, n);
    std::vector<bool> is_ref(static_cast<std::size_t>(m), false);
    for (Index k = 0; k < n; ++k)
    {
        is_ref[static_cast<std::size_t>(ref[static_cast<std::size_t>(k)])] = true;
        g_hat(ref[static_cast<std::size_t>(k)], k) = 1.0;
    }
    for (Index c = 0; c < n; ++c)
    {
        Index pos = 0;
        for (Index r = 0; r < m; ++r)
        {
            if (is_ref[static_cast<std::size_t>(r)])
                continue;
            const auto e = static_cast<std::size_t>(c * (m - n) + pos++);
            const cplx v = g(r, c);
            const double phase = quantize_phase(std::arg(v), codec.phase_bits[e]);
            const double alpha = quantize_angle(std::atan(std::abs(v)), codec.magnitude_bits[e]);
            g_hat(r, c) = std::polar(std::tan(alpha), phase);
        }
    }
    return SubspacePoint::span_of(g_hat);
}

/// MISO variant: ratios to a reference element, one phase and one arctan-magnitude each.
inline SubspacePoint quantize_miso(const ChannelMatrix &hc, const ScalarCodec &codec, ReferenceMode mode = ReferenceMode::strongest)
{
    require_dims(hc.n() == 1, "quantize_miso: requires a single receive antenna");
    return quantize_scalar(hc.h, codec, mode);
}

inline SubspacePoint quantize_mimo(const ChannelMatrix &hc, const ScalarCodec &codec, ReferenceMode mode = ReferenceMode::strongest)
{
    return quantize_scalar(hc.h, codec, mode);
}

} // namespace bdfb

#endif
