// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Integer-delay, per-symbol-Doppler point-target channel with AWGN.

#include <string>
#include <vector>

#include "isacaf/core.hpp"
#include "isacaf/random.hpp"
#include "isacaf/signaling.hpp"

namespace isacaf {

struct Target {
    cplx b{1.0, 0.0};     // complex path gain
    std::size_t delay = 0; // l_h, in samples
    double doppler = 0.0;  // k_h, cycles per N samples
};

struct ChannelConfig {
    std::vector<Target> targets;
    double noise_variance = 0.0;
    bool distortion_limited = false;  // forces noise_variance = 0

    double effective_noise() const { return distortion_limited ? 0.0 : noise_variance; }

    void validate() const
    {
        if (!(noise_variance >= 0.0)) throw ConfigError("channel: noise variance must be >= 0");
        for (const auto& t : targets)
            if (std::abs(t.b) == 0.0) throw ConfigError("channel: target path gain must be non-zero");
    }
};

/// Adds i.i.d. circular complex Gaussian noise of variance sigma2 per sample.
inline void add_noise(CVec& signal, double sigma2, Rng& rng)
{
    if (sigma2 < 0.0) throw ConfigError("add_noise: variance must be >= 0");
    if (sigma2 == 0.0) return;
    for (auto& s : signal) s += complex_gaussian(rng, sigma2);
}

inline TimeSignal add_noise(TimeSignal signal, double sigma2, Rng& rng)
{
    add_noise(signal.samples, sigma2, rng);
    return signal;
}

/// Received frame: every target contributes its delayed copy of the serialized
/// stream, rotated by e^{j 2 pi (k_h/N)(L+N) m} on symbol m; samples delayed
/// across a symbol boundary carry the previous symbol's tail (zeros before m = 0).
inline Frame apply_channel(const Frame& tx, const ChannelConfig& cfg, Rng& rng)
{
    cfg.validate();
    const FrameConfig& fc = tx.config;
    fc.validate();
    if (tx.symbols.size() != fc.M) throw DimensionError("apply_channel: frame holds " + std::to_string(tx.symbols.size()) +
                                                        " symbols, config says M = " + std::to_string(fc.M));
    for (const auto& t : cfg.targets) {
        if (fc.cp_enabled() && t.delay > fc.L)
            throw ConfigError("apply_channel: target delay " + std::to_string(t.delay) + " exceeds the CP length " +
                              std::to_string(fc.L) + "; inter-block interference would not be absorbed");
        if (t.delay >= fc.symbol_length())
            throw ConfigError("apply_channel: target delay must be shorter than one symbol");
    }
    const CVec stream = tx.serialize();
    const std::size_t len = fc.symbol_length();
    CVec rx(stream.size(), cplx{});
    const double N = static_cast<double>(fc.N);
    for (std::size_t m = 0; m < fc.M; ++m) {
        const std::size_t base = m * len;
        for (const auto& t : cfg.targets) {
            const cplx h = t.b * std::polar(1.0, 2.0 * kPi * (t.doppler / N) * static_cast<double>(len * m));
            for (std::size_t i = 0; i < len; ++i) {
                const std::size_t pos = base + i;
                if (pos < t.delay) continue;
                rx[pos] += h * stream[pos - t.delay];
            }
        }
    }
    add_noise(rx, cfg.effective_noise(), rng);
    return Frame::deserialize(rx, fc);
}

} // namespace isacaf
