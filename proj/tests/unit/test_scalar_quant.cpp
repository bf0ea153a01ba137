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

#include "bdfb/channel.hpp"
#include "bdfb/scalar_quant.hpp"
#include "stats.hpp"

#include <cmath>
#include <numeric>

using namespace bdfb;
using bdfb::testing::RunningStats;

namespace
{
double mean_scalar_distortion(int m, int n, int bits, int trials, std::uint64_t seed)
{
    RunningStats s;
    for (int t = 0; t < trials; ++t)
    {
        auto rng = make_stream(seed, StreamTag::test, {static_cast<std::uint64_t>(t)});
        const auto hc = sample_channel(m, n, 0, rng);
        const auto codec = allocate_bits(m, n, bits, rng);
        const auto q = quantize_scalar(hc.h, codec);
        s.add(chordal_distance_sq(SubspacePoint::span_of(hc.h), q));
    }
    return s.mean;
}
} // namespace

TEST_CASE("allocate_bits - even split and leftover placement")
{
    auto rng = make_stream(3, StreamTag::test);

    const auto a = allocate_bits(2, 1, 4, rng);
    REQUIRE(a.elements() == 1);
    CHECK(a.phase_bits[0] == 2);
    CHECK(a.magnitude_bits[0] == 2);

    const auto b = allocate_bits(6, 1, 25, rng);
    REQUIRE(b.elements() == 5);
    int extra = 0, total = 0;
    for (std::size_t e = 0; e < 5; ++e)
        for (int v : {b.phase_bits[e], b.magnitude_bits[e]})
        {
            CHECK((v == 2 || v == 3));
            extra += v - 2;
            total += v;
        }
    CHECK(extra == 5);
    CHECK(total == 25);

    const auto c = allocate_bits(4, 2, 3, rng);
    CHECK(std::accumulate(c.phase_bits.begin(), c.phase_bits.end(), 0) +
              std::accumulate(c.magnitude_bits.begin(), c.magnitude_bits.end(), 0) == 3);

    auto r1 = make_stream(11, StreamTag::scalar_allocation);
    auto r2 = make_stream(11, StreamTag::scalar_allocation);
    const auto d1 = allocate_bits(6, 2, 37, r1);
    const auto d2 = allocate_bits(6, 2, 37, r2);
    CHECK(d1.phase_bits == d2.phase_bits);
    CHECK(d1.magnitude_bits == d2.magnitude_bits);

    CHECK_THROWS_AS(allocate_bits(2, 2, 4, rng), DimensionError);
    CHECK_THROWS_AS(allocate_bits(4, 1, -1, rng), ParameterError);
}

TEST_CASE("quantize_phase and quantize_angle - bin centers")
{
    CHECK(quantize_phase(0.1, 1) == Catch::Approx(pi / 2));
    CHECK(quantize_phase(-0.1, 1) == Catch::Approx(-pi / 2));
    CHECK(quantize_phase(pi, 2) == Catch::Approx(-3 * pi / 4));
    CHECK(quantize_phase(1.0, 0) == 0.0);
    CHECK(quantize_angle(0.0, 2) == Catch::Approx(pi / 16));
    CHECK(quantize_angle(pi / 2, 2) == Catch::Approx(7 * pi / 16));
    CHECK(quantize_angle(1.0, 0) == Catch::Approx(pi / 4));
    for (int bits = 1; bits <= 8; ++bits)
        for (double x = -3.1; x < 3.1; x += 0.037)
        {
            CHECK(std::abs(std::remainder(quantize_phase(x, bits) - x, 2 * pi)) <= pi / std::ldexp(1.0, bits) + 1e-12);
            const double a = std::abs(x) / 2;
            CHECK(std::abs(quantize_angle(a, bits) - a) <= pi / 4 / std::ldexp(1.0, bits) + 1e-12);
        }
}

TEST_CASE("quantize_scalar - grid points are reproduced")
{
    const int bits = 3;
    const double pw = 2 * pi / 8, aw = pi / 2 / 8;
    CMatrix g(4, 2);
    g << 1.0, 0.0,
         0.0, 1.0,
         std::polar(std::tan(1.5 * aw), -pi + 2.5 * pw), std::polar(std::tan(0.5 * aw), -pi + 7.5 * pw),
         std::polar(std::tan(3.5 * aw), -pi + 0.5 * pw), std::polar(std::tan(2.5 * aw), -pi + 4.5 * pw);
    ScalarCodec codec{4, 2, 24, {bits, bits, bits, bits}, {bits, bits, bits, bits}};
    auto rng = make_stream(5, StreamTag::test);
    const CMatrix mix = complex_gaussian_matrix(2, 2, rng);
    const auto q = quantize_scalar(g * mix, codec, ReferenceMode::literal);
    CHECK(chordal_distance_sq(SubspacePoint::span_of(g), q) <= 1e-20);
    const auto qs = quantize_scalar(g * mix, codec, ReferenceMode::strongest);
    CHECK(chordal_distance_sq(SubspacePoint::span_of(g), qs) <= 1e-20);
}

TEST_CASE("quantize_scalar - invariant to the choice of basis")
{
    for (int t = 0; t < 50; ++t)
    {
        auto rng = make_stream(21, StreamTag::test, {static_cast<std::uint64_t>(t)});
        const auto hc = sample_channel(6, 2, 0, rng);
        const auto codec = allocate_bits(6, 2, 40, rng);
        const CMatrix mix = complex_gaussian_matrix(2, 2, rng);
        const auto q1 = quantize_scalar(hc.h, codec);
        const auto q2 = quantize_scalar(hc.h * mix, codec);
        const auto q3 = quantize_scalar(hc.h * cplx(0.0, 3.7), codec);
        CHECK(chordal_distance_sq(q1, q2) <= 1e-18);
        CHECK(chordal_distance_sq(q1, q3) <= 1e-18);
        CHECK(orthonormality_error(q1.basis()) <= 1e-12);

        const auto hm = sample_channel(6, 1, 0, rng);
        const auto cm = allocate_bits(6, 1, 20, rng);
        const auto p1 = quantize_miso(hm, cm);
        ChannelMatrix scaled{hm.h * cplx(-0.4, 2.0), 0};
        CHECK(chordal_distance_sq(p1, quantize_miso(scaled, cm)) <= 1e-20);
    }
}

TEST_CASE("quantize_scalar - distortion falls with the bit budget")
{
    double prev = 2.0;
    for (int bits : {6, 12, 18, 24})
    {
        const double d = mean_scalar_distortion(6, 1, bits, 2000, 31);
        CHECK(d < prev);
        prev = d;
    }
    prev = 3.0;
    for (int bits : {8, 16, 24})
    {
        const double d = mean_scalar_distortion(4, 2, bits, 2000, 32);
        CHECK(d < prev);
        prev = d;
    }
}

TEST_CASE("quantize_scalar - worse than a random codebook at equal bits")
{
    for (int bits : {4, 8, 12})
    {
        RunningStats rvq;
        for (int t = 0; t < 2000; ++t)
        {
            auto rng = make_stream(41, StreamTag::test, {static_cast<std::uint64_t>(t)});
            const auto hc = sample_channel(4, 2, 0, rng);
            rvq.add(quantize_fresh_codebook(SubspacePoint::span_of(hc.h), bits, rng).distance_sq);
        }
        CHECK(mean_scalar_distortion(4, 2, bits, 2000, 42) > rvq.mean);
    }
}

TEST_CASE("select_reference_rows - modes")
{
    CMatrix h(4, 2);
    h << 0.1, 0.0,
         0.0, 0.1,
         3.0, 0.2,
         0.1, 2.0;
    const auto strong = select_reference_rows(h, ReferenceMode::strongest);
    CHECK(strong == std::vector<Index>{2, 3});
    CHECK(select_reference_rows(h, ReferenceMode::literal) == std::vector<Index>{0, 1});

    CMatrix singular(4, 2);
    singular << 1.0, 2.0,
                2.0, 4.0,
                0.5, 1.0,
                0.0, 1.0;
    const auto fallback = select_reference_rows(singular, ReferenceMode::literal);
    CHECK(fallback != std::vector<Index>{0, 1});
    ScalarCodec codec{4, 2, 16, {2, 2, 2, 2}, {2, 2, 2, 2}};
    CHECK_NOTHROW(quantize_scalar(singular, codec, ReferenceMode::literal));

    CHECK(reference_index_bits(6, 1) == 3);
    CHECK(reference_index_bits(4, 2) == 3);
    CHECK(reference_index_bits(8, 4) == 7);

    ScalarCodec wrong{6, 2, 16, {}, {}};
    CHECK_THROWS_AS(quantize_scalar(h, wrong), DimensionError);
}
