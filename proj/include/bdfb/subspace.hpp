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

#ifndef BDFB_SUBSPACE_HPP
#define BDFB_SUBSPACE_HPP

#include "common.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace bdfb
{

/// Largest codebook size (in bits) that is ever materialized or scanned exhaustively by default.
inline constexpr int default_explicit_bits_cap = 22;

/// Orthonormalizes the columns of `a` in place (modified Gram-Schmidt with one
/// reorthogonalization pass). The implied triangular factor has a positive real
/// diagonal, which is the phase convention that makes the Q factor of a complex
/// Gaussian matrix Haar distributed.
inline void orthonormalize_in_place(CMatrix &a)
{
    const Index n = a.cols();
    for (Index j = 0; j < n; ++j)
    {
        const double before = a.col(j).norm();
        for (int pass = 0; pass < 2; ++pass)
            for (Index k = 0; k < j; ++k)
                a.col(j) -= a.col(k) * a.col(k).dot(a.col(j));
        const double nrm = a.col(j).norm();
        if (!(nrm > 1e-12 * before) || nrm == 0.0)
            throw DegenerateError("orthonormalize: columns are numerically linearly dependent");
        a.col(j) /= nrm;
    }
}

inline CMatrix orthonormalize(CMatrix a)
{
    orthonormalize_in_place(a);
    return a;
}

/// Frobenius norm of basis^H basis - I.
inline double orthonormality_error(const CMatrix &basis)
{
    return (basis.adjoint() * basis - CMatrix::Identity(basis.cols(), basis.cols())).norm();
}

/// A point on the complex Grassmannian G(m, n), stored as an m x n basis with orthonormal columns.
class SubspacePoint
{
  public:
    /// Wraps an existing orthonormal basis; throws DimensionError if the columns are
    /// not orthonormal within `tol` (Frobenius).
    static SubspacePoint from_orthonormal(CMatrix basis, double tol = 1e-10)
    {
        require_dims(basis.cols() >= 1 && basis.rows() >= basis.cols(), "SubspacePoint: need 1 <= n <= m");
        if (!(orthonormality_error(basis) <= tol))
            throw DimensionError("SubspacePoint: basis columns are not orthonormal");
        return SubspacePoint(std::move(basis));
    }

    /// Orthonormal basis of the column span of `a` (full column rank required).
    static SubspacePoint span_of(const CMatrix &a)
    {
        require_dims(a.cols() >= 1 && a.rows() >= a.cols(), "SubspacePoint: need 1 <= n <= m");
        return SubspacePoint(orthonormalize(a));
    }

    const CMatrix &basis() const { return basis_; }
    Index m() const { return basis_.rows(); }
    Index n() const { return basis_.cols(); }

  private:
    explicit SubspacePoint(CMatrix basis) : basis_(std::move(basis)) {}
    CMatrix basis_;
};

/// Uniformly distributed point on G(m, n): span of an i.i.d. CN(0,1) matrix, orthonormalized
/// with the positive-diagonal convention.
inline SubspacePoint sample_uniform_subspace(Index m, Index n, Engine &rng)
{
    if (n < 1 || n >= m)
        throw DimensionError("sample_uniform_subspace: requires 1 <= n < m");
    return SubspacePoint::span_of(complex_gaussian_matrix(m, n, rng));
}

/// Haar-distributed n x n unitary.
inline CMatrix sample_unitary(Index n, Engine &rng)
{
    return orthonormalize(complex_gaussian_matrix(n, n, rng));
}

inline void require_same_shape(const SubspacePoint &a, const SubspacePoint &b, const char *who)
{
    if (a.m() != b.m() || a.n() != b.n())
        throw DimensionError(std::string(who) + ": subspace dimensions differ");
}

/// Principal angles in ascending order, arccos of the singular values of A^H B (clamped to [0, 1]).
inline std::vector<double> principal_angles(const SubspacePoint &a, const SubspacePoint &b)
{
    require_same_shape(a, b, "principal_angles");
    const CMatrix cross = a.basis().adjoint() * b.basis();
    Eigen::JacobiSVD<CMatrix> svd(cross);
    const auto &sv = svd.singularValues();
    std::vector<double> theta(static_cast<std::size_t>(sv.size()));
    for (Index i = 0; i < sv.size(); ++i)
        theta[static_cast<std::size_t>(i)] = std::acos(std::clamp(sv(i), 0.0, 1.0));
    std::sort(theta.begin(), theta.end());
    return theta;
}

/// sum of sin^2 over the principal angles.
inline double chordal_distance_sq_from_angles(const std::vector<double> &theta)
{
    double s = 0.0;
    for (double t : theta)
        s += std::sin(t) * std::sin(t);
    return s;
}

/// Squared chordal distance, N - ||A^H B||_F^2, evaluated as the projection residual
/// ||B - A A^H B||_F^2 so that nearby subspaces keep full relative accuracy.
inline double chordal_distance_sq(const SubspacePoint &a, const SubspacePoint &b)
{
    require_same_shape(a, b, "chordal_distance");
    const CMatrix residual = b.basis() - a.basis() * (a.basis().adjoint() * b.basis());
    return std::min(residual.squaredNorm(), static_cast<double>(a.n()));
}

inline double chordal_distance(const SubspacePoint &a, const SubspacePoint &b)
{
    return std::sqrt(chordal_distance_sq(a, b));
}

// ---------- Codebooks and quantization ----------

class Codebook
{
  public:
    Codebook(std::vector<SubspacePoint> entries, int bits) : entries_(std::move(entries)), bits_(bits)
    {
        if (bits < 0 || bits > 62)
            throw ParameterError("Codebook: bits out of range");
        if (entries_.size() != (std::size_t{1} << bits))
            throw DimensionError("Codebook: size must be exactly 2^bits");
        for (const auto &e : entries_)
            if (e.m() != entries_.front().m() || e.n() != entries_.front().n())
                throw DimensionError("Codebook: entries have different dimensions");
    }

    const std::vector<SubspacePoint> &entries() const { return entries_; }
    int bits() const { return bits_; }
    std::size_t size() const { return entries_.size(); }
    Index m() const { return entries_.front().m(); }
    Index n() const { return entries_.front().n(); }

  private:
    std::vector<SubspacePoint> entries_;
    int bits_;
};

/// 2^bits independent uniform points on G(m, n), drawn in index order from `rng`.
inline Codebook random_codebook(Index m, Index n, int bits, Engine &rng, int bits_cap = default_explicit_bits_cap)
{
    if (bits < 0 || bits > bits_cap)
        throw ParameterError("random_codebook: bits exceed the explicit codebook cap");
    std::vector<SubspacePoint> entries;
    entries.reserve(std::size_t{1} << bits);
    for (std::size_t i = 0; i < (std::size_t{1} << bits); ++i)
        entries.push_back(sample_uniform_subspace(m, n, rng));
    return Codebook(std::move(entries), bits);
}

struct QuantizationResult
{
    std::size_t index = 0;
    SubspacePoint point;
    double distance_sq = 0.0;
};

namespace detail
{
// ||W^H H||_F^2 without temporaries. Larger score means smaller chordal distance.
inline double alignment_score(const CMatrix &w, const CMatrix &h)
{
    double s = 0.0;
    for (Index k = 0; k < w.cols(); ++k)
        for (Index l = 0; l < h.cols(); ++l)
            s += std::norm(w.col(k).dot(h.col(l)));
    return s;
}
} // namespace detail

/// Exhaustive nearest-codeword search in squared chordal distance; ties go to the lowest index.
inline QuantizationResult quantize(const SubspacePoint &h_dir, const Codebook &cb)
{
    if (cb.size() == 0)
        throw ParameterError("quantize: empty codebook");
    require_same_shape(h_dir, cb.entries().front(), "quantize");
    std::size_t best = 0;
    double best_score = -1.0;
    for (std::size_t i = 0; i < cb.size(); ++i)
    {
        const double s = detail::alignment_score(cb.entries()[i].basis(), h_dir.basis());
        if (s > best_score)
        {
            best_score = s;
            best = i;
        }
    }
    const SubspacePoint &w = cb.entries()[best];
    return {best, w, chordal_distance_sq(h_dir, w)};
}

/// Same result as quantize(h_dir, random_codebook(m, n, bits, rng)) but streams the
/// codewords instead of storing them.
inline QuantizationResult quantize_fresh_codebook(const SubspacePoint &h_dir, int bits, Engine &rng)
{
    if (bits < 0 || bits > 62)
        throw ParameterError("quantize_fresh_codebook: bits out of range");
    const Index m = h_dir.m(), n = h_dir.n();
    if (n >= m)
        throw DimensionError("quantize_fresh_codebook: requires n < m");
    const std::uint64_t count = std::uint64_t{1} << bits;

    // Hot loop on raw column-major storage; mirrors orthonormalize_in_place + alignment_score.
    const auto mm = static_cast<std::size_t>(m), nn = static_cast<std::size_t>(n);
    std::vector<cplx> w(mm * nn), best_w(mm * nn);
    const cplx *h = h_dir.basis().data();
    boost::random::normal_distribution<double> nd(0.0, 0.70710678118654752440);
    std::uint64_t best = 0;
    double best_score = -1.0;
    for (std::uint64_t i = 0; i < count; ++i)
    {
        for (auto &x : w)
        {
            const double re = nd(rng);
            const double im = nd(rng);
            x = {re, im};
        }
        for (std::size_t j = 0; j < nn; ++j)
        {
            cplx *cj = &w[j * mm];
            double before = 0.0;
            for (std::size_t r = 0; r < mm; ++r)
                before += std::norm(cj[r]);
            for (int pass = 0; pass < 2; ++pass)
                for (std::size_t k = 0; k < j; ++k)
                {
                    const cplx *ck = &w[k * mm];
                    double pr = 0.0, pi_ = 0.0; // ck^H cj
                    for (std::size_t r = 0; r < mm; ++r)
                    {
                        pr += ck[r].real() * cj[r].real() + ck[r].imag() * cj[r].imag();
                        pi_ += ck[r].real() * cj[r].imag() - ck[r].imag() * cj[r].real();
                    }
                    for (std::size_t r = 0; r < mm; ++r)
                        cj[r] -= cplx(ck[r].real() * pr - ck[r].imag() * pi_, ck[r].real() * pi_ + ck[r].imag() * pr);
                }
            double nrm = 0.0;
            for (std::size_t r = 0; r < mm; ++r)
                nrm += std::norm(cj[r]);
            if (!(nrm > 1e-24 * before) || nrm == 0.0)
                throw DegenerateError("quantize_fresh_codebook: degenerate codeword");
            const double inv = 1.0 / std::sqrt(nrm);
            for (std::size_t r = 0; r < mm; ++r)
                cj[r] *= inv;
        }
        double score = 0.0;
        for (std::size_t k = 0; k < nn; ++k)
            for (std::size_t l = 0; l < nn; ++l)
            {
                const cplx *wk = &w[k * mm];
                const cplx *hl = h + l * mm;
                double pr = 0.0, pi_ = 0.0;
                for (std::size_t r = 0; r < mm; ++r)
                {
                    pr += wk[r].real() * hl[r].real() + wk[r].imag() * hl[r].imag();
                    pi_ += wk[r].real() * hl[r].imag() - wk[r].imag() * hl[r].real();
                }
                score += pr * pr + pi_ * pi_;
            }
        if (score > best_score)
        {
            best_score = score;
            best = i;
            best_w = w;
        }
    }
    CMatrix basis = Eigen::Map<const CMatrix>(best_w.data(), m, n);
    auto point = SubspacePoint::from_orthonormal(std::move(basis));
    const double d2 = chordal_distance_sq(h_dir, point);
    return {static_cast<std::size_t>(best), std::move(point), d2};
}

// ---------- Distortion of random codebooks ----------

/// Natural log of C_MN = (1/T!) prod_{i=1..n} (m-i)!/(n-i)!, T = n(m-n).
inline double log_c_mn(int m, int n)
{
    if (n < 1 || m <= n)
        throw DimensionError("c_mn: requires m > n >= 1");
    const double t = static_cast<double>(n) * (m - n);
    double acc = -std::lgamma(t + 1.0);
    for (int i = 1; i <= n; ++i)
        acc += std::lgamma(static_cast<double>(m - i + 1)) - std::lgamma(static_cast<double>(n - i + 1));
    return acc;
}

inline double c_mn(int m, int n) { return std::exp(log_c_mn(m, n)); }

/// Complex dimension T = n(m - n) of G(m, n); the small-ball volume grows as x^T.
inline int grassmann_exponent(int m, int n) { return n * (m - n); }

struct DistortionBoundParams
{
    int m = 0;
    int n = 0;
    int bits = 0;
    double a = 0.5;

    int t() const { return grassmann_exponent(m, n); }
    double c() const { return c_mn(m, n); }
    /// (C_MN 2^B)^(-a/T) <= 1, i.e. C_MN 2^B >= 1.
    bool a_admissible() const { return log_c_mn(m, n) / std::log(2.0) + bits >= 0.0; }
};

struct DistortionBound
{
    double first_term = 0.0;       ///< Gamma(1/T)/T * C^(-1/T) * 2^(-B/T); dominant for large B
    double exponential_term = 0.0; ///< N exp(-(2^B C)^(1-a))
    double full = 0.0;             ///< sum of both terms
    bool a_admissible = false;
};

/// Upper bound on the expected squared chordal distortion of a random 2^B codebook.
inline DistortionBound distortion_bound(const DistortionBoundParams &p)
{
    if (p.n < 1 || p.m <= p.n)
        throw DimensionError("distortion_bound: requires m > n >= 1");
    if (!(p.a > 0.0 && p.a < 1.0))
        throw ParameterError("distortion_bound: a must lie in (0, 1)");
    if (p.bits < 0)
        throw ParameterError("distortion_bound: bits must be nonnegative");
    const double t = p.t();
    const double ln_c = log_c_mn(p.m, p.n);
    const double ln2 = std::log(2.0);
    DistortionBound out;
    out.first_term = std::exp(std::lgamma(1.0 / t) - std::log(t) - ln_c / t - p.bits * ln2 / t);
    const double ln_size_c = p.bits * ln2 + ln_c;
    out.exponential_term = p.n * std::exp(-std::exp((1.0 - p.a) * ln_size_c));
    out.full = out.first_term + out.exponential_term;
    out.a_admissible = p.a_admissible();
    return out;
}

/// Squared chordal distance between a fixed subspace and the best of 2^bits independent
/// uniform codewords, drawn from the codebook-minimum law without building the codebook.
/// Single-codeword CDF is F(x) = C_MN x^T truncated at F = 1 (exact for n = 1, where it is
/// x^(M-1), and exact for x <= 1 whenever m >= 2n); the minimum has 1 - (1 - F)^(2^B).
inline double sample_min_distortion(int m, int n, int bits, Engine &rng)
{
    if (n < 1 || m <= n)
        throw DimensionError("sample_min_distortion: requires m > n >= 1");
    if (bits < 0)
        throw ParameterError("sample_min_distortion: bits must be nonnegative");
    const double t = grassmann_exponent(m, n);
    const double ln_c = log_c_mn(m, n);
    const double v = uniform_open01(rng);
    // F(x) = -expm1(log(v) / 2^B) solves (1 - F)^(2^B) = v without cancellation.
    const double f = -std::expm1(std::ldexp(std::log(v), -bits));
    const double x = std::exp((std::log(f) - ln_c) / t);
    return std::min({x, std::exp(-ln_c / t), static_cast<double>(n)});
}

enum class AngleSplit
{
    jacobi,    ///< conditional law of the sin^2 principal angles given their sum
    dirichlet, ///< symmetric Dirichlet(1,...,1)
};

namespace detail
{
// Unnormalized density of u = x / sum(x) on the unit simplex under the complex Jacobi law
// of sin^2 principal angles: prod u_i^(m-2n) prod_{i<j} (u_i - u_j)^2.
inline double jacobi_shape(const std::vector<double> &u, int m, int n)
{
    double g = 1.0;
    for (int i = 0; i < n; ++i)
    {
        g *= std::pow(u[i], m - 2 * n);
        for (int j = i + 1; j < n; ++j)
            g *= (u[i] - u[j]) * (u[i] - u[j]);
    }
    return g;
}

// Grid maximum of jacobi_shape over the simplex, cached per (m, n).
inline double jacobi_shape_max(int m, int n)
{
    static std::mutex mu;
    static std::map<std::pair<int, int>, double> cache;
    std::lock_guard<std::mutex> lock(mu);
    const auto key = std::make_pair(m, n);
    if (auto it = cache.find(key); it != cache.end())
        return it->second;

    double best = 0.0;
    if (n == 1)
        best = 1.0;
    else
    {
        const int steps = n == 2 ? 4000 : (n == 3 ? 400 : 40);
        std::vector<int> c(static_cast<std::size_t>(n), 0);
        std::vector<double> u(static_cast<std::size_t>(n));
        // enumerate compositions of `steps` into n nonnegative parts
        std::function<void(int, int)> rec = [&](int pos, int left) {
            if (pos == n - 1)
            {
                c[pos] = left;
                for (int i = 0; i < n; ++i)
                    u[i] = static_cast<double>(c[i]) / steps;
                best = std::max(best, jacobi_shape(u, m, n));
                return;
            }
            for (int k = 0; k <= left; ++k)
            {
                c[pos] = k;
                rec(pos + 1, left - k);
            }
        };
        rec(0, steps);
        best *= 1.1; // grid slack
    }
    cache.emplace(key, best);
    return best;
}
} // namespace detail

/// Splits a total squared chordal distortion d2 into n sin^2 principal angles, each in [0, 1].
inline std::vector<double> split_distortion(int m, int n, double d2, AngleSplit split, Engine &rng)
{
    std::vector<double> x(static_cast<std::size_t>(n), d2 / n);
    if (n == 1 || d2 <= 0.0)
        return x;
    if (d2 >= n * (1.0 - 1e-12))
        return x;
    const double g_max = split == AngleSplit::jacobi ? detail::jacobi_shape_max(m, n) : 1.0;
    std::vector<double> u(static_cast<std::size_t>(n));
    for (long attempt = 0; attempt < 10'000'000; ++attempt)
    {
        double sum = 0.0;
        for (auto &ui : u)
        {
            ui = standard_exponential(rng);
            sum += ui;
        }
        bool inside = true;
        for (auto &ui : u)
        {
            ui /= sum;
            inside = inside && d2 * ui <= 1.0;
        }
        if (!inside)
            continue;
        if (split == AngleSplit::jacobi && uniform_open01(rng) * g_max > detail::jacobi_shape(u, m, n))
            continue;
        for (int i = 0; i < n; ++i)
            x[i] = d2 * u[i];
        return x;
    }
    return x; // equal split; only reachable for d2 pressed against n
}

/// Synthetic quantized subspace at squared chordal distance exactly d2 from h_dir:
/// H_hat = H U diag(cos theta) + E diag(sin theta), with U Haar on U(n) and E a uniformly
/// random orthonormal m x n frame in the orthogonal complement of span(H).
inline SubspacePoint apply_quantization_error(const SubspacePoint &h_dir, double d2, Engine &rng,
                                              AngleSplit split = AngleSplit::jacobi)
{
    const Index m = h_dir.m(), n = h_dir.n();
    if (m < 2 * n)
        throw UnsupportedGeometryError("apply_quantization_error: requires m >= 2n");
    if (!(d2 >= 0.0 && d2 <= n + 1e-12))
        throw ParameterError("apply_quantization_error: d2 must lie in [0, n]");
    d2 = std::min(d2, static_cast<double>(n));

    const auto x = split_distortion(static_cast<int>(m), static_cast<int>(n), d2, split, rng);
    const CMatrix rotated = h_dir.basis() * sample_unitary(n, rng);

    CMatrix e = complex_gaussian_matrix(m, n, rng);
    for (int pass = 0; pass < 2; ++pass)
        e -= h_dir.basis() * (h_dir.basis().adjoint() * e);
    orthonormalize_in_place(e);

    CMatrix out(m, n);
    for (Index i = 0; i < n; ++i)
    {
        const double s2 = std::clamp(x[static_cast<std::size_t>(i)], 0.0, 1.0);
        out.col(i) = std::sqrt(1.0 - s2) * rotated.col(i) + std::sqrt(s2) * e.col(i);
    }
    return SubspacePoint::from_orthonormal(std::move(out));
}

} // namespace bdfb

#endif
