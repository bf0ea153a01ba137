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

#ifndef BDFB_SIM_RECORDS_HPP
#define BDFB_SIM_RECORDS_HPP

#include "config.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

namespace bdfb::sim
{

/// Malformed results file; the message carries the line number.
struct CsvError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// One SNR point of a scenario, averaged over trials. Rates are in bits per channel use.
struct RateRecord
{
    std::string scenario_id;
    std::string scheme;    ///< "BD" or "ZF"
    std::string quantizer; ///< quantizer actually used at this point
    int m = 0;
    int n = 0;
    int k = 0;
    double snr_db = 0.0;
    int bits_per_user = 0;
    int trials = 0;
    double sum_rate = 0.0;
    double per_user_rate = 0.0;     ///< sum_rate / k
    double rate_loss = 0.0;         ///< perfect-CSIT per-user rate minus per_user_rate
    double theorem1_bound = 0.0;    ///< n log2(1 + P D) with the empirical distortion
    double empirical_distortion = 0.0;
    double distortion_bound = 0.0;
    double std_err = 0.0; ///< standard error of sum_rate

    bool operator==(const RateRecord &) const = default;
};

inline constexpr std::array<const char *, 16> csv_columns = {
    "scenario_id", "scheme", "quantizer", "m", "n", "k", "snr_db", "bits_per_user", "trials",
    "sum_rate", "per_user_rate", "rate_loss", "theorem1_bound", "empirical_distortion", "distortion_bound", "std_err"};

namespace detail
{
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
} // namespace detail

inline void write_results(const std::vector<RateRecord> &records, std::ostream &out)
{
    for (std::size_t c = 0; c < csv_columns.size(); ++c)
        out << (c ? "," : "") << csv_columns[c];
    out << '\n';
    using detail::format_double;
    for (const auto &r : records)
    {
        out << r.scenario_id << ',' << r.scheme << ',' << r.quantizer << ',' << r.m << ',' << r.n << ',' << r.k << ','
            << format_double(r.snr_db) << ',' << r.bits_per_user << ',' << r.trials << ',' << format_double(r.sum_rate) << ','
            << format_double(r.per_user_rate) << ',' << format_double(r.rate_loss) << ','
            << format_double(r.theorem1_bound) << ',' << format_double(r.empirical_distortion) << ','
            << format_double(r.distortion_bound) << ',' << format_double(r.std_err) << '\n';
    }
}

inline void write_results(const std::vector<RateRecord> &records, const std::string &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_results(records, out);
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

inline std::vector<RateRecord> read_results(std::istream &in)
{
    std::string line;
    int line_no = 1;
    auto fail = [&](const std::string &what) { throw CsvError("line " + std::to_string(line_no) + ": " + what); };

    if (!std::getline(in, line))
        fail("missing header row");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto header = detail::split(line, ',');
    for (const auto &h : header)
        if (std::find_if(csv_columns.begin(), csv_columns.end(), [&](const char *c) { return h == c; }) == csv_columns.end())
            fail("unknown column '" + h + "'");
    for (std::size_t c = 0; c < csv_columns.size(); ++c)
        if (c >= header.size() || header[c] != csv_columns[c])
            fail(std::string("expected column '") + csv_columns[c] + "' at position " + std::to_string(c + 1));
    if (header.size() != csv_columns.size())
        fail("unexpected extra columns");

    std::vector<RateRecord> out;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto f = detail::split(line, ',');
        if (f.size() != csv_columns.size())
            fail("expected " + std::to_string(csv_columns.size()) + " fields, found " + std::to_string(f.size()));
        RateRecord r;
        try
        {
            using detail::parse_number;
            r.scenario_id = f[0];
            r.scheme = f[1];
            r.quantizer = f[2];
            r.m = parse_number<int>(f[3], "m");
            r.n = parse_number<int>(f[4], "n");
            r.k = parse_number<int>(f[5], "k");
            r.snr_db = parse_number<double>(f[6], "snr_db");
            r.bits_per_user = parse_number<int>(f[7], "bits_per_user");
            r.trials = parse_number<int>(f[8], "trials");
            r.sum_rate = parse_number<double>(f[9], "sum_rate");
            r.per_user_rate = parse_number<double>(f[10], "per_user_rate");
            r.rate_loss = parse_number<double>(f[11], "rate_loss");
            r.theorem1_bound = parse_number<double>(f[12], "theorem1_bound");
            r.empirical_distortion = parse_number<double>(f[13], "empirical_distortion");
            r.distortion_bound = parse_number<double>(f[14], "distortion_bound");
            r.std_err = parse_number<double>(f[15], "std_err");
        }
        catch (const ConfigError &e)
        {
            fail(e.what());
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<RateRecord> read_results(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CsvError("cannot open '" + path + "'");
    return read_results(in);
}

} // namespace bdfb::sim

#endif
