// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Monostatic OFDM radar receiver: CP removal, division filter and the 2-D
// delay-Doppler periodogram.

#include <string>
#include <vector>

#include "isacaf/core.hpp"
#include "isacaf/fft.hpp"
#include "isacaf/signaling.hpp"

namespace isacaf {

/// N x M channel estimates, column m holding symbol m.
struct ChannelEstimateMatrix {
    std::size_t N = 0, M = 0;
    CVec data;  // data[m * N + n]

    cplx& at(std::size_t n, std::size_t m) { return data[m * N + n]; }
    const cplx& at(std::size_t n, std::size_t m) const { return data[m * N + n]; }
};

/// h_m = DFT(remove_cp(y_m)) ./ x~_m with the pre-amplifier reference symbols.
inline ChannelEstimateMatrix division_filter(const Frame& rx, const std::vector<SymbolVector>& reference)
{
    const FrameConfig& fc = rx.config;
    if (rx.symbols.size() != fc.M || reference.size() != fc.M)
        throw DimensionError("division_filter: expected " + std::to_string(fc.M) + " received and reference symbols");
    ChannelEstimateMatrix h;
    h.N = fc.N;
    h.M = fc.M;
    h.data.resize(fc.N * fc.M);
    for (std::size_t m = 0; m < fc.M; ++m) {
        if (reference[m].size() != fc.N) throw DimensionError("division_filter: reference symbol length != N");
        const CVec y = fft::unitary_dft(remove_cp(rx.symbols[m], fc.L).samples);
        if (y.size() != fc.N) throw DimensionError("division_filter: received symbol length != N + L");
        for (std::size_t n = 0; n < fc.N; ++n) {
            const cplx x = reference[m][n];
            if (std::abs(x) == 0.0)
                throw NumericError("division_filter: zero reference symbol at subcarrier " + std::to_string(n) +
                                   ", symbol " + std::to_string(m));
            h.at(n, m) = y[n] / x;
        }
    }
    return h;
}

/// Per(l, k) on l = 0..N_Per-1 and k = -M_Per/2..M_Per/2-1.
struct Periodogram {
    std::size_t N_per = 0, M_per = 0;
    std::size_t N = 0, M = 0;  // underlying estimate size
    RVec values;               // values[l * M_per + (k + M_per/2)]

    long k_min() const { return -static_cast<long>(M_per / 2); }
    double at(std::size_t l, long k) const
    {
        return values[l * M_per + static_cast<std::size_t>(k - k_min())];
    }

    /// Range profile at zero Doppler.
    RVec zero_doppler_cut() const
    {
        RVec c(N_per);
        for (std::size_t l = 0; l < N_per; ++l) c[l] = at(l, 0);
        return c;
    }
};

/// Per(l,k) = 1/(NM) |sum_n (sum_m H(n,m) e^{-j 2 pi k m / M_Per}) e^{j 2 pi l n / N_Per}|^2.
inline Periodogram periodogram(const ChannelEstimateMatrix& h, std::size_t N_per, std::size_t M_per)
{
    if (N_per < h.N || M_per < h.M)
        throw ConfigError("periodogram: grid " + std::to_string(N_per) + "x" + std::to_string(M_per) +
                          " is smaller than the estimate " + std::to_string(h.N) + "x" + std::to_string(h.M));
    // Doppler DFT per subcarrier.
    std::vector<CVec> dop(h.N, CVec(M_per));
    for (std::size_t n = 0; n < h.N; ++n) {
        CVec& row = dop[n];
        std::fill(row.begin(), row.end(), cplx{});
        for (std::size_t m = 0; m < h.M; ++m) row[m] = h.at(n, m);
        fft::forward(row);
    }
    Periodogram p;
    p.N_per = N_per;
    p.M_per = M_per;
    p.N = h.N;
    p.M = h.M;
    p.values.assign(N_per * M_per, 0.0);
    const double scale = 1.0 / (static_cast<double>(h.N) * static_cast<double>(h.M));
    CVec col(N_per);
    for (std::size_t kb = 0; kb < M_per; ++kb) {
        std::fill(col.begin(), col.end(), cplx{});
        for (std::size_t n = 0; n < h.N; ++n) col[n] = dop[n][kb];
        fft::inverse(col);
        // FFT bin kb is Doppler k = kb (kb < M_per/2) or kb - M_per.
        const long k = kb < (M_per + 1) / 2 ? static_cast<long>(kb) : static_cast<long>(kb) - static_cast<long>(M_per);
        if (k < p.k_min() || k >= p.k_min() + static_cast<long>(M_per)) continue;
        const std::size_t kc = static_cast<std::size_t>(k - p.k_min());
        for (std::size_t l = 0; l < N_per; ++l) p.values[l * M_per + kc] = std::norm(col[l]) * scale;
    }
    return p;
}

/// Zero-Doppler range profile only (k = 0): 1/(NM) |IDFT_{N_Per}(sum_m H(n,m))|^2.
inline RVec range_profile(const ChannelEstimateMatrix& h, std::size_t N_per)
{
    if (N_per < h.N) throw ConfigError("range_profile: N_Per smaller than N");
    CVec col(N_per);
    for (std::size_t n = 0; n < h.N; ++n)
        for (std::size_t m = 0; m < h.M; ++m) col[n] += h.at(n, m);
    fft::inverse(col);
    RVec out(N_per);
    const double scale = 1.0 / (static_cast<double>(h.N) * static_cast<double>(h.M));
    for (std::size_t l = 0; l < N_per; ++l) out[l] = std::norm(col[l]) * scale;
    return out;
}

/// Periodogram SNR in dB: SNR + 10 log10(N_Per M_Per).
inline double snr_per(double snr_linear, std::size_t N_per, std::size_t M_per)
{
    if (!(snr_linear > 0.0) || N_per == 0 || M_per == 0) throw ConfigError("snr_per: inputs must be positive");
    return linear_to_db(snr_linear) + linear_to_db(static_cast<double>(N_per) * static_cast<double>(M_per));
}

} // namespace isacaf
