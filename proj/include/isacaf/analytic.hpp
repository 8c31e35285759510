// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Closed-form and semi-analytic AF predictors: Bussgang decomposition of the
// ambiguity function, limiter-conditioned zero-Doppler / zero-delay cuts and
// the joint clipping probabilities of a bivariate Rayleigh pair.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "isacaf/ambiguity.hpp"
#include "isacaf/core.hpp"
#include "isacaf/pa.hpp"
#include "isacaf/parallel.hpp"
#include "isacaf/random.hpp"
#include "isacaf/signaling.hpp"

namespace isacaf {

// ---------------------------------------------------------------------------
// Joint clipping probabilities

/// P(|x(p)| <= V, |x(p-l)| <= V) for unit-power circular Gaussian samples
/// whose squared envelopes have correlation rho, with Y = V / sigma.
///
/// Evaluates 1 - 2e^{-Y^2} + 1/(2 pi) int e^{-Y^2 [1 + (1-rho)/(1 + 2 sqrt(rho) sin t + rho)]} dt
/// with the periodic trapezoid rule; 4096 points checked against 8192, the
/// grid keeps doubling (up to 2^20 points) until successive values agree to 1e-9.
inline double joint_below_prob(double Y, double rho)
{
    if (!(Y > 0.0)) throw ConfigError("joint_below_prob: Y must be positive");
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("joint_below_prob: rho must lie in [0, 1]");
    if (std::isinf(Y)) return 1.0;
    const double e = std::exp(-Y * Y);
    if (rho == 1.0) return 1.0 - e;
    const double sr = std::sqrt(rho);
    auto mean_over = [&](std::size_t n, std::size_t stride, std::size_t offset) {
        double acc = 0.0;
        for (std::size_t i = offset; i < n; i += stride) {
            const double t = -kPi + 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
            const double g = (1.0 - rho) / (1.0 + 2.0 * sr * std::sin(t) + rho);
            acc += std::exp(-Y * Y * (1.0 + g));
        }
        return acc;
    };
    std::size_t n = 4096;
    double sum = mean_over(n, 1, 0);
    double prev = sum / static_cast<double>(n);
    for (;;) {
        // Refine by adding the midpoints only.
        const std::size_t n2 = 2 * n;
        sum += mean_over(n2, 2, 1);
        const double cur = sum / static_cast<double>(n2);
        n = n2;
        if (std::abs(cur - prev) <= 1e-9) return 1.0 - 2.0 * e + cur;
        if (n >= (std::size_t{1} << 20)) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "joint_below_prob: no convergence for Y=%.6g rho=%.12g (|delta| = %.3g at %zu points)", Y,
                          rho, std::abs(cur - prev), n);
            throw NumericError(buf);
        }
        prev = cur;
    }
}

struct ClipProbabilities {
    double p_below_both = 0.0;  // both samples below the threshold
    double p_mixed = 0.0;       // one specific sample above, the other below (each ordering)
    double p_above_both = 0.0;
    double Y = 0.0;
    double rho = 0.0;

    double total() const { return p_below_both + 2.0 * p_mixed + p_above_both; }
};

inline ClipProbabilities clip_probabilities(double Y, double rho)
{
    ClipProbabilities c;
    c.Y = Y;
    c.rho = rho;
    c.p_below_both = joint_below_prob(Y, rho);
    const double e = std::isinf(Y) ? 0.0 : std::exp(-Y * Y);
    c.p_mixed = 1.0 - e - c.p_below_both;
    c.p_above_both = 2.0 * e + c.p_below_both - 1.0;
    return c;
}

// ---------------------------------------------------------------------------
// Envelope lag correlation

/// rho(l) = Cov(|x(p)|^2, |x(p-l)|^2) / Var(|x|^2), l = 0..max_lag.
struct LagCorrelation {
    RVec rho;                    // values used by the predictors (negative estimates clipped to 0)
    RVec raw;                    // unclipped estimates, NaN where degenerate
    std::vector<bool> degenerate;
    std::size_t clipped = 0;     // number of negative estimates clipped to 0

    bool has(std::size_t l) const { return l < rho.size(); }
    double at(std::size_t l) const
    {
        if (!has(l)) throw ConfigError("lag correlation missing for lag " + std::to_string(l));
        return rho[l];
    }

    /// Large-N Gaussian assumption: samples at different instants independent.
    static LagCorrelation independent(std::size_t max_lag)
    {
        LagCorrelation c;
        c.rho.assign(max_lag + 1, 0.0);
        c.raw.assign(max_lag + 1, 0.0);
        c.degenerate.assign(max_lag + 1, false);
        c.rho[0] = c.raw[0] = 1.0;
        return c;
    }
};

struct RhoEstimate {
    double rho = 0.0;
    double raw = 0.0;
    bool degenerate = false;
    bool clipped = false;
};

namespace detail {

struct LagMoments {
    RVec sa, sb, saa, sbb, sab;
    double count = 0;
};

inline RhoEstimate finish_rho(const LagMoments& m, std::size_t i, std::size_t lag)
{
    RhoEstimate r;
    const double n = m.count;
    const double ma = m.sa[i] / n, mb = m.sb[i] / n;
    const double va = m.saa[i] / n - ma * ma;
    const double vb = m.sbb[i] / n - mb * mb;
    r.degenerate = !(va > 1e-12 * ma * ma) || !(vb > 1e-12 * mb * mb);
    if (lag == 0) {
        r.rho = r.raw = 1.0;
        return r;
    }
    if (r.degenerate) {
        r.raw = std::numeric_limits<double>::quiet_NaN();
        r.rho = 0.0;
        return r;
    }
    r.raw = (m.sab[i] / n - ma * mb) / std::sqrt(va * vb);
    r.rho = std::clamp(r.raw, 0.0, 1.0);
    r.clipped = r.raw < 0.0;
    return r;
}

inline LagMoments lag_moments(const ConstellationSpec& constellation, BasisKind basis, std::size_t N,
                              const std::vector<std::size_t>& lags, std::size_t trials, const SeedStream& seeds,
                              ParallelOptions par)
{
    if (trials == 0) throw ConfigError("estimate_rho: trials must be >= 1");
    for (auto l : lags)
        if (l > N) throw ConfigError("estimate_rho: lag " + std::to_string(l) + " exceeds N = " + std::to_string(N));
    const Constellation c(constellation);
    const SignalingBasis b(basis, N);
    const std::size_t L = lags.size();
    return reduce_trials(
        trials,
        [&] {
            return LagMoments{RVec(L, 0.0), RVec(L, 0.0), RVec(L, 0.0), RVec(L, 0.0), RVec(L, 0.0), 0.0};
        },
        [&](LagMoments& m, std::size_t t) {
            Rng rng = seeds.rng(t);
            // Two consecutive symbols so that lags up to N reach into the previous one.
            const CVec prev = synthesize(b, draw_symbols(c, N, rng)).samples;
            const CVec cur = synthesize(b, draw_symbols(c, N, rng)).samples;
            for (std::size_t i = 0; i < L; ++i) {
                const std::size_t l = lags[i];
                for (std::size_t p = 0; p < N; ++p) {
                    const double a = std::norm(cur[p]);
                    const double q = p >= l ? std::norm(cur[p - l]) : std::norm(prev[N + p - l]);
                    m.sa[i] += a;
                    m.sb[i] += q;
                    m.saa[i] += a * a;
                    m.sbb[i] += q * q;
                    m.sab[i] += a * q;
                }
            }
            m.count += static_cast<double>(N);
        },
        [](LagMoments& into, const LagMoments& from) {
            add_into(into.sa, from.sa);
            add_into(into.sb, from.sb);
            add_into(into.saa, from.saa);
            add_into(into.sbb, from.sbb);
            add_into(into.sab, from.sab);
            into.count += from.count;
        },
        par);
}

} // namespace detail

/// Sample normalized covariance of squared envelopes at lag l (0 <= l <= N).
inline RhoEstimate estimate_rho(const ConstellationSpec& constellation, BasisKind basis, std::size_t N, std::size_t l,
                                std::size_t trials, const SeedStream& seeds, ParallelOptions par = {})
{
    const auto m = detail::lag_moments(constellation, basis, N, {l}, trials, seeds, par);
    return detail::finish_rho(m, 0, l);
}

/// rho(l) for l = 0..max_lag in one pass. Negative estimates are clipped to 0
/// and reported on stderr; degenerate (constant-envelope) lags use 0.
inline LagCorrelation estimate_lag_correlation(const ConstellationSpec& constellation, BasisKind basis, std::size_t N,
                                               std::size_t max_lag, std::size_t trials, const SeedStream& seeds,
                                               ParallelOptions par = {}, bool warn = true)
{
    std::vector<std::size_t> lags(max_lag + 1);
    for (std::size_t l = 0; l <= max_lag; ++l) lags[l] = l;
    const auto m = detail::lag_moments(constellation, basis, N, lags, trials, seeds, par);
    LagCorrelation out;
    for (std::size_t l = 0; l <= max_lag; ++l) {
        const RhoEstimate r = detail::finish_rho(m, l, l);
        out.rho.push_back(r.rho);
        out.raw.push_back(r.raw);
        out.degenerate.push_back(r.degenerate);
        if (r.clipped) ++out.clipped;
    }
    if (warn && out.clipped > 0)
        std::fprintf(stderr, "warning: %zu negative envelope correlation estimate(s) clipped to 0 (%s, %s, N=%zu)\n",
                     out.clipped, constellation.name().c_str(), basis_name(basis).c_str(), N);
    return out;
}

// ---------------------------------------------------------------------------
// Bussgang decomposition of the AF

struct BussgangAfTerms {
    ComplexAf ax, axd, adx, ad;
    cplx kappa{1.0, 0.0};
    AmbiguitySurface recombined;  // |A(l,k)|^2 of kappa x + d from the four terms
};

/// Self and cross AFs of x and d and their recombination into |A_{kappa x + d}|^2.
///
/// With s = kappa x + d, A_s = |kappa|^2 A_x + kappa A_{x,d} + kappa^* A_{d,x} + A_d,
/// whose squared magnitude expands into the ten-term sum below. For real
/// kappa the coefficients reduce to kappa^2, kappa^3, ...
inline BussgangAfTerms bussgang_af_decompose(const CVec& x, const CVec& d, cplx kappa, std::size_t K,
                                             AfMode mode = AfMode::Periodic)
{
    if (x.size() != d.size()) throw DimensionError("bussgang_af_decompose: x and d differ in length");
    BussgangAfTerms t;
    t.kappa = kappa;
    t.ax = cross_af(x, x, K, mode);
    t.axd = cross_af(x, d, K, mode);
    t.adx = cross_af(d, x, K, mode);
    t.ad = cross_af(d, d, K, mode);
    const double k2 = std::norm(kappa);
    const cplx kc = std::conj(kappa);
    t.recombined.lags = t.ax.lags;
    t.recombined.K = K;
    t.recombined.n = x.size();
    t.recombined.mode = mode;
    t.recombined.values.resize(t.ax.values.size());
    for (std::size_t i = 0; i < t.ax.values.size(); ++i) {
        const cplx Ax = t.ax.values[i], Axd = t.axd.values[i], Adx = t.adx.values[i], Ad = t.ad.values[i];
        const cplx cross = k2 * kc * Ax * std::conj(Axd) + k2 * kappa * Ax * std::conj(Adx) + k2 * Ax * std::conj(Ad) +
                           kappa * kappa * Axd * std::conj(Adx) + kappa * Axd * std::conj(Ad) +
                           kc * Adx * std::conj(Ad);
        t.recombined.values[i] = k2 * k2 * std::norm(Ax) + k2 * (std::norm(Axd) + std::norm(Adx)) + std::norm(Ad) +
                                 2.0 * cross.real();
    }
    return t;
}

/// Zero-Doppler form without the x-d cross AFs:
/// |kappa|^4 |A_x(l,0)|^2 + |A_d(l,0)|^2 + 2 Re{kappa^2 A_x(l,0) A_d^*(l,0)}.
inline RVec bussgang_zero_doppler(const CVec& x, const CVec& d, cplx kappa, AfMode mode)
{
    const CVec ax = zero_doppler_cross(x, x, mode);
    const CVec ad = zero_doppler_cross(d, d, mode);
    RVec out(ax.size());
    const double k4 = std::norm(kappa) * std::norm(kappa);
    for (std::size_t i = 0; i < ax.size(); ++i)
        out[i] = k4 * std::norm(ax[i]) + std::norm(ad[i]) + 2.0 * (kappa * kappa * ax[i] * std::conj(ad[i])).real();
    return out;
}

struct BussgangExpectation {
    double per_lag = 0.0;   // E|A(l,0)|^2, l != 0
    double eisl = 0.0;      // (2N - 2) per_lag
    double mainlobe = 0.0;  // E|A(0,0)|^2
    double eislr() const { return eisl / mainlobe; }
};

/// Expected zero-Doppler sidelobe and mainlobe levels under the i.i.d.
/// Gaussian Bussgang model. `d4` is E|d|^4 (zero for a linear amplifier).
inline BussgangExpectation expected_zero_doppler_bussgang(cplx kappa, double sigma2, double sigma_d2, std::size_t N,
                                                          double d4 = 0.0)
{
    if (!(sigma2 > 0.0) || sigma_d2 < 0.0 || N < 2 || d4 < 0.0)
        throw ConfigError("expected_zero_doppler_bussgang: need sigma^2 > 0, sigma_d^2 >= 0, d4 >= 0, N >= 2");
    const double k2 = std::norm(kappa);
    BussgangExpectation e;
    e.per_lag = k2 * k2 * sigma2 * sigma2 + sigma_d2 * sigma_d2;
    e.eisl = (2.0 * static_cast<double>(N) - 2.0) * e.per_lag;
    e.mainlobe = k2 * k2 * 2.0 * sigma2 * sigma2 + d4 + 2.0 * k2 * static_cast<double>(N) * sigma2 * sigma_d2;
    return e;
}

// ---------------------------------------------------------------------------
// Limiter-conditioned cuts

/// Per-lag weights of the conditioned zero-Doppler cut, indexed by |l|.
struct SelWeights {
    RVec below;  // P_<
    RVec mixed;  // 1 - e^{-Y^2} - P_<
    RVec above;  // 2 e^{-Y^2} + P_< - 1
    double Y = 0.0;
};

/// Weights for |l| = 0..max_lag. Lags beyond the correlation table use rho = 0.
inline SelWeights sel_weights(double Y, const LagCorrelation& rho, std::size_t max_lag, bool require_all = true)
{
    if (require_all && !rho.has(max_lag))
        throw ConfigError("sel weights: lag correlation covers lags 0.." + std::to_string(rho.rho.size() - 1) +
                          ", needed 0.." + std::to_string(max_lag));
    SelWeights w;
    w.Y = Y;
    w.below.resize(max_lag + 1);
    w.mixed.resize(max_lag + 1);
    w.above.resize(max_lag + 1);
    const double e = std::isinf(Y) ? 0.0 : std::exp(-Y * Y);
    std::optional<ClipProbabilities> independent;
    for (std::size_t l = 0; l <= max_lag; ++l) {
        if (l == 0) {
            w.below[0] = 1.0 - e;
            w.mixed[0] = 0.0;
            w.above[0] = e;
            continue;
        }
        const double r = rho.has(l) ? rho.rho[l] : 0.0;
        ClipProbabilities p;
        if (r == 0.0) {
            if (!independent) independent = clip_probabilities(Y, 0.0);
            p = *independent;
        } else {
            p = clip_probabilities(Y, r);
        }
        w.below[l] = p.p_below_both;
        w.mixed[l] = p.p_mixed;
        w.above[l] = p.p_above_both;
    }
    return w;
}

/// Conditioned zero-Doppler cut of the limiter output for one pre-amplifier
/// realization x (unit power, before back-off), on `delay_axis(len, mode)`:
///
///   A(l,0) = P_< A_x(l,0) + f w_mix V/sqrt(N) sum_p (x(p) e^{-j arg x(p-l)} + x(p-l) e^{j arg x(p)})
///            + w_above V^2/sqrt(N) sum_p e^{j(arg x(p) - arg x(p-l))}
///
/// with x replaced by its linear output G alpha x. `mixed_term_factor` is f
/// (2 as commonly written for the cut, 1 in the W-term form).
inline CVec sel_zero_doppler_cut(const CVec& x, const PaConfig& cfg, const SelWeights& w, AfMode mode = AfMode::Aperiodic,
                                 double mixed_term_factor = 2.0, std::optional<double> norm_length = std::nullopt)
{
    cfg.validate();
    const std::size_t n = x.size();
    if (w.below.size() < n) throw ConfigError("sel_zero_doppler_cut: weights do not cover all lags");
    const cplx ga = cfg.linear ? cfg.G : cfg.G * cfg.alpha();
    CVec gx(n), ph(n), cgx(n);
    for (std::size_t i = 0; i < n; ++i) {
        gx[i] = ga * x[i];
        cgx[i] = std::conj(gx[i]);
        const double r = std::abs(x[i]);
        ph[i] = r > 0.0 ? x[i] / r : cplx(1.0, 0.0);
    }
    const CVec ax = zero_doppler_cross(gx, gx, mode);
    const CVec m1 = zero_doppler_cross(gx, ph, mode);
    const CVec m2 = zero_doppler_cross(ph, cgx, mode);
    const CVec pp = zero_doppler_cross(ph, ph, mode);
    const auto lags = delay_axis(n, mode);
    const double V = cfg.linear ? 0.0 : cfg.v_sat;
    // Optional renormalization 1/sqrt(norm_length) instead of 1/sqrt(len).
    const double rs = norm_length ? std::sqrt(static_cast<double>(n) / *norm_length) : 1.0;
    CVec out(lags.size());
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const std::size_t al = static_cast<std::size_t>(std::abs(lags[i]));
        out[i] = rs * (w.below[al] * ax[i] + mixed_term_factor * w.mixed[al] * V * (m1[i] + m2[i]) +
                       w.above[al] * V * V * pp[i]);
    }
    return out;
}

/// Convenience overload computing the weights from a lag-correlation table.
inline CVec sel_zero_doppler_cut(const CVec& x, const PaConfig& cfg, const LagCorrelation& rho,
                                 AfMode mode = AfMode::Aperiodic, double mixed_term_factor = 2.0)
{
    if (!rho.has(x.size() - 1))
        throw ConfigError("sel_zero_doppler_cut: lag correlation needed for lags 0.." + std::to_string(x.size() - 1));
    return sel_zero_doppler_cut(x, cfg, sel_weights(cfg.clip_threshold(), rho, x.size() - 1), mode, mixed_term_factor);
}

/// Zero-delay cut of the limiter output:
/// A(0,k) = 1/sqrt(N) ((1 - e^{-Y^2}) sum_p |G alpha x(p)|^2 e^{-j 2 pi kp/K} + V_sat^2 e^{-Y^2} delta(k)).
inline CVec sel_zero_delay_cut(const CVec& x, const PaConfig& cfg, std::size_t K)
{
    cfg.validate();
    const cplx ga = cfg.linear ? cfg.G : cfg.G * cfg.alpha();
    CVec gx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) gx[i] = ga * x[i];
    CVec a = zero_delay_cross(gx, gx, K);
    const double Y = cfg.clip_threshold();
    const double e = std::isinf(Y) ? 0.0 : std::exp(-Y * Y);
    for (auto& v : a) v *= (1.0 - e);
    if (!cfg.linear) a[0] += cfg.v_sat * cfg.v_sat * e / std::sqrt(static_cast<double>(x.size()));
    return a;
}

struct SelEislOptions {
    std::size_t cp_length = 0;              // > 0: AF over the CP-extended symbol of N + L samples
    std::optional<LagCorrelation> rho;      // default: independent samples (rho = 0 for l != 0)
    double mixed_term_factor = 1.0;
};

struct SelEislResult {
    double eisl = 0.0;          // W-term prediction: sum_l E|W_1 + W_2 + W_3 + W_4|^2
    double eisl_mc = 0.0;       // direct Monte-Carlo EISL of the amplified signal (same realizations)
    double mainlobe = 0.0;      // predicted E|A(0,0)|^2
    double mainlobe_mc = 0.0;
    RVec per_lag;               // predicted E|A(l,0)|^2 on delay_axis(N + L, Aperiodic)
    RVec per_lag_mc;
    std::size_t trials = 0;
    double eislr() const { return eisl / mainlobe; }
    double eislr_mc() const { return eisl_mc / mainlobe_mc; }
};

/// Expected integrated sidelobe level of the limiter output from the W-term
/// model, with the aperiodic AF normalized by 1/sqrt(N) (N subcarriers) also
/// when the symbol carries a cyclic prefix.
inline SelEislResult sel_eisl(const PaConfig& cfg, const ConstellationSpec& constellation, BasisKind basis,
                              std::size_t N, std::size_t trials, const SeedStream& seeds, const SelEislOptions& opt = {},
                              ParallelOptions par = {})
{
    cfg.validate();
    if (trials == 0) throw ConfigError("sel_eisl: trials must be >= 1");
    const std::size_t L = opt.cp_length;
    if (L > N) throw ConfigError("sel_eisl: CP length exceeds N");
    const std::size_t len = N + L;
    const LagCorrelation rho = opt.rho ? *opt.rho : LagCorrelation::independent(N);
    const SelWeights w = sel_weights(cfg.clip_threshold(), rho, len - 1, false);
    const Constellation c(constellation);
    const SignalingBasis b(basis, N);
    const std::size_t bins = 2 * len - 1;
    const double norm = static_cast<double>(N);

    struct Acc {
        RVec pred, mc;
    };
    Acc acc = reduce_trials(
        trials, [&] { return Acc{RVec(bins, 0.0), RVec(bins, 0.0)}; },
        [&](Acc& a, std::size_t t) {
            Rng rng = seeds.rng(t);
            const CVec x = add_cp(synthesize(b, draw_symbols(c, N, rng)), L).samples;
            const CVec pred = sel_zero_doppler_cut(x, cfg, w, AfMode::Aperiodic, opt.mixed_term_factor, norm);
            const CVec s = sel_amplify(x, cfg);
            const CVec direct = zero_doppler_cross(s, s, AfMode::Aperiodic);
            const double rs = static_cast<double>(len) / norm;
            for (std::size_t i = 0; i < bins; ++i) {
                a.pred[i] += std::norm(pred[i]);
                a.mc[i] += rs * std::norm(direct[i]);
            }
        },
        [](Acc& into, const Acc& from) {
            add_into(into.pred, from.pred);
            add_into(into.mc, from.mc);
        },
        par);

    SelEislResult r;
    r.trials = trials;
    r.per_lag = std::move(acc.pred);
    r.per_lag_mc = std::move(acc.mc);
    const double T = static_cast<double>(trials);
    for (auto& v : r.per_lag) v /= T;
    for (auto& v : r.per_lag_mc) v /= T;
    for (std::size_t i = 0; i < bins; ++i) {
        if (i == len - 1) continue;
        r.eisl += r.per_lag[i];
        r.eisl_mc += r.per_lag_mc[i];
    }
    r.mainlobe = r.per_lag[len - 1];
    r.mainlobe_mc = r.per_lag_mc[len - 1];
    return r;
}

} // namespace isacaf
