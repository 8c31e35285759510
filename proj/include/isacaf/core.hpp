// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace isacaf {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Base of every library error. `exit_code()` is what the CLI returns.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 2; }
};

/// Invalid configuration or parameter (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Vector/matrix sizes that do not fit together (CLI exit code 2).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Unsupported constellation order or scheme (CLI exit code 2).
class ConstellationError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// Numerical failure: non-convergence, degenerate metrics, zero division (CLI exit code 3).
class NumericError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// dB value clamped to a floor, used for CSV and plot output only.
inline double to_db_clamped(double lin, double floor_db = -100.0)
{
    if (!(lin > 0.0)) return floor_db;
    const double db = linear_to_db(lin);
    return db < floor_db ? floor_db : db;
}

inline double energy(const CVec& v)
{
    double e = 0.0;
    for (const auto& s : v) e += std::norm(s);
    return e;
}

inline double mean_power(const CVec& v) { return v.empty() ? 0.0 : energy(v) / static_cast<double>(v.size()); }

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline unsigned log2_exact(std::size_t n)
{
    unsigned b = 0;
    while ((std::size_t{1} << b) < n) ++b;
    return b;
}

} // namespace isacaf
