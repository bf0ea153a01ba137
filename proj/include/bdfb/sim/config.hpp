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

#ifndef BDFB_SIM_CONFIG_HPP
#define BDFB_SIM_CONFIG_HPP

#include "../common.hpp"
#include "../precoding.hpp"
#include "../scalar_quant.hpp"
#include "../scaling.hpp"
#include "../subspace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace bdfb::sim
{

/// Malformed or inconsistent scenario configuration.
struct ConfigError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

enum class QuantizerKind
{
    perfect,
    rvq_explicit,
    rvq_statistical,
    scalar,
};

inline std::string to_string(QuantizerKind q)
{
    switch (q)
    {
    case QuantizerKind::perfect:
        return "perfect";
    case QuantizerKind::rvq_explicit:
        return "rvq_explicit";
    case QuantizerKind::rvq_statistical:
        return "rvq_statistical";
    case QuantizerKind::scalar:
        return "scalar";
    }
    return "unknown";
}

enum class CodebookMode
{
    fresh, ///< new random codebook for every (trial, user)
    fixed, ///< one codebook per (user, bits) shared by all trials
};

struct BitRule
{
    enum class Kind
    {
        fixed,
        scaled_bd_3db,
        scaled_zf_3db,
        explicit_list,
    };
    Kind kind = Kind::fixed;
    int fixed_bits = 0;
    std::vector<int> list;

    /// Feedback bits per quantized direction at each grid point. Scaled rules are rounded up.
    std::vector<int> bits_for(const std::vector<double> &snr_grid_db, int m, int n) const
    {
        std::vector<int> out;
        out.reserve(snr_grid_db.size());
        if (kind == Kind::explicit_list)
        {
            if (list.size() != snr_grid_db.size())
                throw ConfigError("bit_rule: explicit list length differs from the SNR grid");
            return list;
        }
        for (double p : snr_grid_db)
        {
            double b = fixed_bits;
            if (kind == Kind::scaled_bd_3db)
                b = bits_3db_bd(m, n, p);
            else if (kind == Kind::scaled_zf_3db)
                b = bits_3db_zf(m, p);
            // tolerance keeps exact integers such as 21.000000000000004 from rounding up
            out.push_back(std::max(0, static_cast<int>(std::ceil(b - 1e-9))));
        }
        return out;
    }
};

struct ScenarioConfig
{
    std::string scenario_id = "scenario";
    int m = 0;
    int n = 0;
    int k = 0;
    std::vector<double> snr_grid_db;
    QuantizerKind quantizer = QuantizerKind::perfect;
    BitRule bit_rule;
    int trials = 1000;
    int codebooks_per_trial = 1;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::bd;

    double distortion_a = 0.5;
    int explicit_bits_cap = default_explicit_bits_cap;
    AngleSplit angle_split = AngleSplit::jacobi;
    ReferenceMode scalar_reference = ReferenceMode::strongest;
    CodebookMode codebook_mode = CodebookMode::fresh;

    /// Dimension of each quantized direction: n for BD, one receive antenna for ZF.
    int direction_dim() const { return scheme == Scheme::zf ? 1 : n; }
    int directions_per_user() const { return scheme == Scheme::zf ? n : 1; }

    void validate() const
    {
        if (scenario_id.empty() || scenario_id.find_first_of(",\"\r\n") != std::string::npos)
            throw ConfigError("scenario_id must be nonempty and free of commas, quotes and newlines");
        if (n < 1 || k < 1 || m < 1)
            throw ConfigError("m, n and k must be positive");
        if (k * n != m)
            throw ConfigError("k * n must equal m");
        if (scheme == Scheme::bd && k < 2)
            throw ConfigError("BD requires k >= 2");
        if (snr_grid_db.empty())
            throw ConfigError("snr_grid_db must be nonempty");
        for (double p : snr_grid_db)
            if (!std::isfinite(p))
                throw ConfigError("snr_grid_db entries must be finite");
        if (trials < 1)
            throw ConfigError("trials must be at least 1");
        if (codebooks_per_trial < 1)
            throw ConfigError("codebooks_per_trial must be at least 1");
        if (!(distortion_a > 0.0 && distortion_a < 1.0))
            throw ConfigError("distortion_a must lie in (0, 1)");
        if (explicit_bits_cap < 0 || explicit_bits_cap > 40)
            throw ConfigError("explicit_bits_cap must lie in [0, 40]");
        if (bit_rule.kind == BitRule::Kind::scaled_zf_3db && m < 2)
            throw ConfigError("scaled_zf_3db requires m >= 2");
        if (bit_rule.kind == BitRule::Kind::fixed && bit_rule.fixed_bits < 0)
            throw ConfigError("fixed bits must be nonnegative");
        for (int b : bit_rule.list)
            if (b < 0)
                throw ConfigError("explicit bits must be nonnegative");
        if (bit_rule.kind == BitRule::Kind::explicit_list && bit_rule.list.size() != snr_grid_db.size())
            throw ConfigError("bit_rule: explicit list length differs from the SNR grid");
        if (quantizer == QuantizerKind::rvq_statistical && m < 2 * direction_dim())
            throw ConfigError("rvq_statistical requires m >= 2 * direction dimension");
    }
};

namespace detail
{

inline std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline std::vector<std::string> split(const std::string &s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        out.push_back(trim(item));
    if (!s.empty() && s.back() == sep)
        out.emplace_back();
    return out;
}

template <typename T>
T parse_number(const std::string &text, const std::string &key)
{
    T value{};
    const char *first = text.data();
    const char *last = first + text.size();
    if (!text.empty() && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc() || ptr != last)
        throw ConfigError(key + ": cannot parse '" + text + "'");
    return value;
}

/// "a,b,c" or "start:step:stop" (inclusive of stop within a small tolerance).
inline std::vector<double> parse_grid(const std::string &text)
{
    std::vector<double> out;
    if (text.find(':') != std::string::npos)
    {
        const auto parts = split(text, ':');
        if (parts.size() != 3)
            throw ConfigError("snr_grid_db: range must be start:step:stop");
        const double a = parse_number<double>(parts[0], "snr_grid_db");
        const double s = parse_number<double>(parts[1], "snr_grid_db");
        const double b = parse_number<double>(parts[2], "snr_grid_db");
        if (!(s > 0.0) || b < a)
            throw ConfigError("snr_grid_db: range needs a positive step and stop >= start");
        const auto count = static_cast<long>(std::floor((b - a) / s + 1e-9));
        if (count > 100000)
            throw ConfigError("snr_grid_db: range too long");
        for (long i = 0; i <= count; ++i)
            out.push_back(a + static_cast<double>(i) * s);
        return out;
    }
    for (const auto &p : split(text, ','))
        out.push_back(parse_number<double>(p, "snr_grid_db"));
    return out;
}

inline BitRule parse_bit_rule(const std::string &text)
{
    BitRule r;
    const std::string t = lower(text);
    if (t == "scaled_bd_3db" || t == "scaled_bd_eq11")
        r.kind = BitRule::Kind::scaled_bd_3db;
    else if (t == "scaled_zf_3db" || t == "scaled_zf_eq12")
        r.kind = BitRule::Kind::scaled_zf_3db;
    else if (t.rfind("fixed:", 0) == 0)
    {
        r.kind = BitRule::Kind::fixed;
        r.fixed_bits = parse_number<int>(trim(t.substr(6)), "bit_rule");
    }
    else if (t.rfind("explicit:", 0) == 0)
    {
        r.kind = BitRule::Kind::explicit_list;
        for (const auto &p : split(t.substr(9), ','))
            r.list.push_back(parse_number<int>(p, "bit_rule"));
    }
    else
        throw ConfigError("bit_rule: expected fixed:B, scaled_bd_3db, scaled_zf_3db or explicit:B1,B2,...");
    return r;
}

} // namespace detail

/// Parses the flat `key = value` format. '#' starts a comment.
inline ScenarioConfig parse_config(std::istream &in)
{
    ScenarioConfig cfg;
    std::map<std::string, int> seen;
    bool have_rule = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string::npos)
            throw ConfigError(where + "expected key = value");
        const std::string key = detail::lower(detail::trim(line.substr(0, eq)));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (seen.count(key))
            throw ConfigError(where + "duplicate key '" + key + "' (first on line " + std::to_string(seen[key]) + ")");
        seen[key] = line_no;
        try
        {
            if (key == "scenario_id")
                cfg.scenario_id = value;
            else if (key == "m")
                cfg.m = detail::parse_number<int>(value, key);
            else if (key == "n")
                cfg.n = detail::parse_number<int>(value, key);
            else if (key == "k")
                cfg.k = detail::parse_number<int>(value, key);
            else if (key == "snr_grid_db")
                cfg.snr_grid_db = detail::parse_grid(value);
            else if (key == "quantizer")
            {
                const auto v = detail::lower(value);
                if (v == "perfect")
                    cfg.quantizer = QuantizerKind::perfect;
                else if (v == "rvq_explicit")
                    cfg.quantizer = QuantizerKind::rvq_explicit;
                else if (v == "rvq_statistical")
                    cfg.quantizer = QuantizerKind::rvq_statistical;
                else if (v == "scalar")
                    cfg.quantizer = QuantizerKind::scalar;
                else
                    throw ConfigError("quantizer: unknown value '" + value + "'");
            }
            else if (key == "bit_rule")
            {
                cfg.bit_rule = detail::parse_bit_rule(value);
                have_rule = true;
            }
            else if (key == "trials")
                cfg.trials = detail::parse_number<int>(value, key);
            else if (key == "codebooks_per_trial")
                cfg.codebooks_per_trial = detail::parse_number<int>(value, key);
            else if (key == "seed")
                cfg.seed = detail::parse_number<std::uint64_t>(value, key);
            else if (key == "scheme")
            {
                const auto v = detail::lower(value);
                if (v == "bd")
                    cfg.scheme = Scheme::bd;
                else if (v == "zf")
                    cfg.scheme = Scheme::zf;
                else
                    throw ConfigError("scheme: expected BD or ZF");
            }
            else if (key == "distortion_a")
                cfg.distortion_a = detail::parse_number<double>(value, key);
            else if (key == "explicit_bits_cap")
                cfg.explicit_bits_cap = detail::parse_number<int>(value, key);
            else if (key == "angle_split")
            {
                const auto v = detail::lower(value);
                if (v == "jacobi")
                    cfg.angle_split = AngleSplit::jacobi;
                else if (v == "dirichlet")
                    cfg.angle_split = AngleSplit::dirichlet;
                else
                    throw ConfigError("angle_split: expected jacobi or dirichlet");
            }
            else if (key == "scalar_reference")
            {
                const auto v = detail::lower(value);
                if (v == "strongest")
                    cfg.scalar_reference = ReferenceMode::strongest;
                else if (v == "literal")
                    cfg.scalar_reference = ReferenceMode::literal;
                else
                    throw ConfigError("scalar_reference: expected strongest or literal");
            }
            else if (key == "codebook_mode")
            {
                const auto v = detail::lower(value);
                if (v == "fresh")
                    cfg.codebook_mode = CodebookMode::fresh;
                else if (v == "fixed")
                    cfg.codebook_mode = CodebookMode::fixed;
                else
                    throw ConfigError("codebook_mode: expected fresh or fixed");
            }
            else
                throw ConfigError("unknown key '" + key + "'");
        }
        catch (const ConfigError &e)
        {
            throw ConfigError(where + e.what());
        }
    }
    for (const char *req : {"m", "n", "k", "snr_grid_db", "quantizer"})
        if (!seen.count(req))
            throw ConfigError(std::string("missing required key '") + req + "'");
    if (!have_rule && cfg.quantizer != QuantizerKind::perfect)
        throw ConfigError("missing required key 'bit_rule'");
    cfg.validate();
    return cfg;
}

inline ScenarioConfig parse_config(const std::string &text)
{
    std::istringstream in(text);
    return parse_config(in);
}

inline ScenarioConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

} // namespace bdfb::sim

#endif
