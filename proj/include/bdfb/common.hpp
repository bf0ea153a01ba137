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

#ifndef BDFB_COMMON_HPP
#define BDFB_COMMON_HPP

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace bdfb
{

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Error taxonomy. Callers that only care about "bad input" can catch std::invalid_argument.

/// Mismatched or impossible matrix dimensions.
struct DimensionError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

/// A scalar parameter outside its admissible domain.
struct ParameterError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

/// Geometry the statistical quantization mode cannot represent (m < 2n).
struct UnsupportedGeometryError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

/// Numerically rank-deficient channel or precoder input.
struct DegenerateError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

inline void require_dims(bool ok, const std::string &what)
{
    if (!ok)
        throw DimensionError(what);
}

/// 10^(dB/10), exact.
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace bdfb

#endif
