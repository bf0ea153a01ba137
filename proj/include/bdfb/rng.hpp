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

#ifndef BDFB_RNG_HPP
#define BDFB_RNG_HPP

#include "common.hpp"

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include <cstdint>
#include <initializer_list>
#include <random>

namespace bdfb
{

/// 64-bit Mersenne twister (Boost's implementation generates noticeably faster than libstdc++'s).
using Engine = boost::random::mt19937_64;

/// Purpose tags mixed into substream derivation so that, e.g., channel draws and
/// codebook draws of the same (trial, user) never share a stream.
enum class StreamTag : std::uint64_t
{
    channel = 0x43484e4c,
    codebook = 0x43424f4b,
    distortion = 0x44495354,
    scalar_allocation = 0x53414c43,
    unitary = 0x554e4954,
    test = 0x54455354,
};

inline std::uint64_t splitmix64(std::uint64_t &state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Hash of (seed, tag, keys...) used as the seed of an independent substream.
inline std::uint64_t substream_seed(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> keys)
{
    std::uint64_t state = seed;
    std::uint64_t h = splitmix64(state) ^ static_cast<std::uint64_t>(tag);
    for (auto k : keys)
    {
        state = h ^ (k + 0x632be59bd9b4e019ULL);
        h = splitmix64(state);
    }
    state = h;
    return splitmix64(state);
}

/// Reproducible stream: (seed, tag, keys) fully determines every draw.
inline Engine make_stream(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> keys = {})
{
    std::seed_seq seq{substream_seed(seed, tag, keys)};
    return Engine(seq);
}

/// Circularly-symmetric complex Gaussian CN(0, 1): real and imaginary parts N(0, 1/2).
inline cplx complex_normal(Engine &rng)
{
    static constexpr double s = 0.70710678118654752440;
    boost::random::normal_distribution<double> nd(0.0, s);
    const double re = nd(rng);
    const double im = nd(rng);
    return {re, im};
}

/// m x n matrix of i.i.d. CN(0, 1) entries, filled column-major.
inline CMatrix complex_gaussian_matrix(Index m, Index n, Engine &rng)
{
    CMatrix g(m, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i)
            g(i, j) = complex_normal(rng);
    return g;
}

/// Uniform on the open interval (0, 1).
inline double uniform_open01(Engine &rng)
{
    boost::random::uniform_01<double> u;
    double x = u(rng);
    while (x <= 0.0)
        x = u(rng);
    return x;
}

inline double standard_exponential(Engine &rng)
{
    boost::random::exponential_distribution<double> e(1.0);
    return e(rng);
}

} // namespace bdfb

#endif
