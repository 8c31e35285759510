// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Thin FFTW wrapper. Plans are created once per (size, direction) under a
// mutex; execution through the new-array interface is thread safe.

#include <fftw3.h>

#include <map>
#include <mutex>
#include <span>
#include <utility>

#include "isacaf/core.hpp"

namespace isacaf::fft {

enum class Direction { Forward, Inverse };

namespace detail {

class PlanCache {
public:
    static PlanCache& instance()
    {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(std::size_t n, Direction dir)
    {
        const auto key = std::make_pair(n, dir == Direction::Forward);
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        auto* buf = fftw_alloc_complex(n);
        const int sign = dir == Direction::Forward ? FFTW_FORWARD : FFTW_BACKWARD;
        fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (p == nullptr) throw NumericError("FFTW could not create a plan of size " + std::to_string(n));
        plans_.emplace(key, p);
        return p;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::pair<std::size_t, bool>, fftw_plan> plans_;
};

} // namespace detail

/// Unnormalized in-place DFT. Forward uses e^{-j2pi kn/N}, Inverse e^{+j2pi kn/N}.
inline void transform(std::span<cplx> data, Direction dir)
{
    if (data.size() <= 1) return;
    fftw_plan p = detail::PlanCache::instance().get(data.size(), dir);
    auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(p, ptr, ptr);
}

inline void forward(std::span<cplx> data) { transform(data, Direction::Forward); }
inline void inverse(std::span<cplx> data) { transform(data, Direction::Inverse); }

/// Unitary DFT (1/sqrt(N)), i.e. multiplication by F_N.
inline CVec unitary_dft(CVec v)
{
    forward(v);
    const double s = 1.0 / std::sqrt(static_cast<double>(v.size()));
    for (auto& x : v) x *= s;
    return v;
}

/// Unitary inverse DFT, i.e. multiplication by F_N^H.
inline CVec unitary_idft(CVec v)
{
    inverse(v);
    const double s = 1.0 / std::sqrt(static_cast<double>(v.size()));
    for (auto& x : v) x *= s;
    return v;
}

} // namespace isacaf::fft
