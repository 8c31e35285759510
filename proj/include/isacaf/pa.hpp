// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Soft envelope limiter, input back-off and Bussgang statistics.

#include <cmath>
#include <limits>
#include <string>

#include "isacaf/core.hpp"
#include "isacaf/parallel.hpp"
#include "isacaf/random.hpp"
#include "isacaf/signaling.hpp"

namespace isacaf {

/// Ratio between the 1 dB compression input power and V_sat^2 for a soft
/// envelope limiter driven by a constant envelope: the output is 1 dB below
/// the linear extrapolation exactly when |x|^2 = 10^0.1 V_sat^2.
inline const double kSelCompressionRatio = std::pow(10.0, 0.1);

/// Backoff coefficient alpha = sqrt(p1db / (ibo * sigma2)).
inline double backoff_coefficient(double p1db, double ibo, double sigma2)
{
    if (!(p1db > 0.0) || !(ibo > 0.0) || !(sigma2 > 0.0))
        throw ConfigError("backoff_coefficient: P1dB, IBO and sigma^2 must all be positive");
    const double alpha = std::sqrt(p1db / (ibo * sigma2));
    if (alpha > 1.0 + 1e-12)
        throw ConfigError("backoff_coefficient: alpha = " + std::to_string(alpha) +
                          " > 1; the signal would sit above the 1 dB compression reference (IBO " +
                          std::to_string(linear_to_db(ibo)) + " dB is too low for P1dB/sigma^2 = " +
                          std::to_string(p1db / sigma2) + ")");
    return std::min(alpha, 1.0);
}

struct PaConfig {
    cplx G{1.0, 0.0};
    double v_sat = 1.0 / std::sqrt(kSelCompressionRatio);
    double p1db = 1.0;
    double ibo = kSelCompressionRatio;  // linear
    double sigma2 = 1.0;                // mean input power of the unit-power signal
    bool linear = false;                // bypass the limiter: s = G x

    /// SEL at a given input back-off in dB with the default P1dB / V_sat relation.
    static PaConfig sel_ibo_db(double ibo_db)
    {
        PaConfig c;
        c.ibo = db_to_linear(ibo_db);
        c.validate();
        return c;
    }

    static PaConfig linear_pa(cplx gain = {1.0, 0.0})
    {
        PaConfig c;
        c.G = gain;
        c.linear = true;
        return c;
    }

    double ibo_db() const { return linear_to_db(ibo); }
    double alpha() const { return backoff_coefficient(p1db, ibo, sigma2); }

    /// Normalized clipping threshold Y = V_sat / (|G| alpha sigma).
    double clip_threshold() const
    {
        if (linear) return kInf;
        return v_sat / (std::abs(G) * alpha() * std::sqrt(sigma2));
    }

    void validate() const
    {
        if (linear) {
            if (std::abs(G) == 0.0) throw ConfigError("PA gain must be non-zero");
            return;
        }
        if (!(v_sat > 0.0)) throw ConfigError("PA: V_sat must be positive");
        if (!(ibo > 0.0)) throw ConfigError("PA: IBO must be positive");
        if (std::abs(G) == 0.0) throw ConfigError("PA gain must be non-zero");
        (void)alpha();
    }
};

/// Amplify one sample: G alpha x inside the linear region, V_sat e^{j arg x} beyond it.
inline cplx sel_sample(cplx x, cplx galpha, double v_sat)
{
    const cplx y = galpha * x;
    // The 4-ulp slack keeps already-limited samples (|y| = V_sat up to rounding) fixed.
    if (std::abs(y) <= v_sat * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) return y;
    return v_sat * (x / std::abs(x));
}

inline CVec sel_amplify(const CVec& x, const PaConfig& cfg)
{
    CVec out(x.size());
    if (cfg.linear) {
        for (std::size_t i = 0; i < x.size(); ++i) out[i] = cfg.G * x[i];
        return out;
    }
    const cplx ga = cfg.G * cfg.alpha();
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = sel_sample(x[i], ga, cfg.v_sat);
    return out;
}

inline TimeSignal sel_amplify(const TimeSignal& x, const PaConfig& cfg)
{
    return {sel_amplify(x.samples, cfg), x.cp_length};
}

inline Frame sel_amplify(const Frame& f, const PaConfig& cfg)
{
    Frame out{f.config, {}};
    out.symbols.reserve(f.symbols.size());
    for (const auto& s : f.symbols) out.symbols.push_back(sel_amplify(s, cfg));
    return out;
}

/// Bussgang decomposition s = kappa x + d of the amplifier output, with x the
/// unit-power pre-back-off signal. A linear PA gives kappa = G alpha.
struct BussgangStats {
    cplx kappa{1.0, 0.0};
    double sigma_d2 = 0.0;    // E|d|^2
    double d4 = 0.0;          // E|d|^4
    double sigma2 = 1.0;      // E|x|^2 estimate
    double output_power = 0;  // E|s|^2
    double sdr = kInf;        // |G|^2 alpha^2 sigma^2 / sigma_d^2
    double Y = kInf;
    double alpha = 1.0;
    double orthogonality = 0; // |E[x^* d]| / (sigma sigma_d)
    std::size_t samples = 0;
};

/// SDR = |G|^2 alpha^2 sigma^2 / sigma_d^2, +inf for a distortion-free amplifier.
inline double sdr(const BussgangStats& stats, const PaConfig& cfg)
{
    if (stats.sigma_d2 <= 0.0) return kInf;
    const double a = cfg.linear ? 1.0 : cfg.alpha();
    return std::norm(cfg.G) * a * a * cfg.sigma2 / stats.sigma_d2;
}

/// Same quantity written as |G|^2 P1dB / (IBO sigma_d^2).
inline double sdr_from_p1db(double sigma_d2, const PaConfig& cfg)
{
    if (sigma_d2 <= 0.0) return kInf;
    return std::norm(cfg.G) * cfg.p1db / (cfg.ibo * sigma_d2);
}

/// SNR_eff = snr0 / (1 + snr0/sdr).
inline double snr_eff(double snr0, double sdr_lin)
{
    if (snr0 < 0.0) throw ConfigError("snr_eff: snr0 must be non-negative");
    if (!(sdr_lin > 0.0)) throw ConfigError("snr_eff: SDR must be positive");
    if (std::isinf(sdr_lin)) return snr0;
    if (std::isinf(snr0)) return sdr_lin;
    return snr0 / (1.0 + snr0 / sdr_lin);
}

/// Closed-form Bussgang gain of a limiter driven by circular Gaussian input,
/// relative to G alpha: 1 - e^{-Y^2} + (sqrt(pi)/2) Y erfc(Y).
inline double gaussian_kappa_ratio(double Y)
{
    if (std::isinf(Y)) return 1.0;
    return 1.0 - std::exp(-Y * Y) + 0.5 * std::sqrt(kPi) * Y * std::erfc(Y);
}

/// Distortion variance relative to |G alpha sigma|^2 for Gaussian input.
inline double gaussian_distortion_ratio(double Y)
{
    if (std::isinf(Y)) return 0.0;
    const double k = gaussian_kappa_ratio(Y);
    return std::max(0.0, 1.0 - std::exp(-Y * Y) - k * k);
}

namespace detail {

struct BussgangSums {
    cplx xs{};      // sum x^* s
    double xx = 0;  // sum |x|^2
    double ss = 0;  // sum |s|^2
    std::size_t n = 0;
};

struct DistortionSums {
    double d2 = 0;
    double d4 = 0;
    cplx xd{};
};

} // namespace detail

/// Monte-Carlo Bussgang statistics of `trials` independent symbols on the given basis.
inline BussgangStats estimate_bussgang(const PaConfig& cfg, const SignalingBasis& basis,
                                       const ConstellationSpec& constellation, std::size_t trials,
                                       const SeedStream& seeds, ParallelOptions par = {})
{
    cfg.validate();
    if (trials == 0) throw ConfigError("estimate_bussgang: trials must be >= 1");
    const Constellation c(constellation);
    const std::size_t n = basis.size;
    auto draw = [&](std::size_t t) {
        Rng rng = seeds.rng(t);
        return synthesize(basis, draw_symbols(c, n, rng)).samples;
    };

    auto first = reduce_trials(
        trials, [] { return detail::BussgangSums{}; },
        [&](detail::BussgangSums& acc, std::size_t t) {
            const CVec x = draw(t);
            const CVec s = sel_amplify(x, cfg);
            for (std::size_t i = 0; i < n; ++i) {
                acc.xs += std::conj(x[i]) * s[i];
                acc.xx += std::norm(x[i]);
                acc.ss += std::norm(s[i]);
            }
            acc.n += n;
        },
        [](detail::BussgangSums& into, const detail::BussgangSums& from) {
            into.xs += from.xs;
            into.xx += from.xx;
            into.ss += from.ss;
            into.n += from.n;
        },
        par);

    BussgangStats st;
    st.kappa = first.xs / first.xx;
    st.samples = first.n;
    st.sigma2 = first.xx / static_cast<double>(first.n);
    st.output_power = first.ss / static_cast<double>(first.n);
    st.alpha = cfg.linear ? 1.0 : cfg.alpha();
    st.Y = cfg.clip_threshold();

    const cplx kappa = st.kappa;
    auto second = reduce_trials(
        trials, [] { return detail::DistortionSums{}; },
        [&](detail::DistortionSums& acc, std::size_t t) {
            const CVec x = draw(t);
            const CVec s = sel_amplify(x, cfg);
            for (std::size_t i = 0; i < n; ++i) {
                const cplx d = s[i] - kappa * x[i];
                const double p = std::norm(d);
                acc.d2 += p;
                acc.d4 += p * p;
                acc.xd += std::conj(x[i]) * d;
            }
        },
        [](detail::DistortionSums& into, const detail::DistortionSums& from) {
            into.d2 += from.d2;
            into.d4 += from.d4;
            into.xd += from.xd;
        },
        par);

    const double count = static_cast<double>(first.n);
    st.sigma_d2 = second.d2 / count;
    st.d4 = second.d4 / count;
    // Below ~1e-28 the residual is rounding noise of an undistorted output.
    if (st.sigma_d2 < 1e-28 * st.output_power) st.sigma_d2 = 0.0;
    st.orthogonality = st.sigma_d2 > 0.0 ? std::abs(second.xd / count) / std::sqrt(st.sigma2 * st.sigma_d2) : 0.0;
    st.sdr = sdr(st, cfg);
    return st;
}

} // namespace isacaf
