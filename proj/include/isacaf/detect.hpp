// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Smallest-of CFAR on periodogram range cuts, threshold calibration and the
// probability-of-detection experiment.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "isacaf/channel.hpp"
#include "isacaf/core.hpp"
#include "isacaf/pa.hpp"
#include "isacaf/parallel.hpp"
#include "isacaf/radar.hpp"
#include "isacaf/random.hpp"
#include "isacaf/signaling.hpp"

namespace isacaf {

struct CfarConfig {
    std::size_t window = 10;  // training cells per side
    std::size_t guard = 2;    // guard cells per side
    double pfa = 1e-4;
    double factor = 0.0;      // threshold multiplier; 0 means "calibrate before use"

    void validate(bool need_factor = true) const
    {
        if (window < 1) throw ConfigError("CFAR: training window must be >= 1");
        if (!(pfa > 0.0 && pfa < 1.0)) throw ConfigError("CFAR: P_fa must lie in (0, 1)");
        if (need_factor && !(factor > 0.0)) throw ConfigError("CFAR: threshold factor must be positive (calibrate first)");
    }
    std::size_t min_length() const { return 2 * (window + guard) + 2; }
};

struct DetectionReport {
    std::vector<bool> detected;
    RVec threshold;
    RVec noise_level;
    std::vector<std::size_t> bins;

    bool hit(std::size_t bin, std::size_t tolerance = 0) const
    {
        const std::size_t lo = bin >= tolerance ? bin - tolerance : 0;
        for (std::size_t b = lo; b <= bin + tolerance && b < detected.size(); ++b)
            if (detected[b]) return true;
        return false;
    }
};

namespace detail {

/// Prefix sums so every window mean is O(1).
inline RVec prefix_sums(const RVec& v)
{
    RVec p(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) p[i + 1] = p[i] + v[i];
    return p;
}

/// SO noise estimate for cell i: min of the leading / lagging window means;
/// a side is used only when its whole window lies inside the cut.
inline double so_noise_level(const RVec& prefix, std::size_t n, std::size_t i, std::size_t W, std::size_t G)
{
    double level = kInf;
    if (i >= G + W) {
        const std::size_t lo = i - G - W;
        level = std::min(level, (prefix[lo + W] - prefix[lo]) / static_cast<double>(W));
    }
    if (i + G + W < n) {
        const std::size_t lo = i + G + 1;
        level = std::min(level, (prefix[lo + W] - prefix[lo]) / static_cast<double>(W));
    }
    return level;
}

} // namespace detail

/// Smallest-of CFAR over a real-valued range cut.
inline DetectionReport so_cfar(const RVec& cut, const CfarConfig& cfg)
{
    cfg.validate();
    const std::size_t n = cut.size();
    if (n < cfg.min_length())
        throw ConfigError("so_cfar: cut of " + std::to_string(n) + " cells is too short for window " +
                          std::to_string(cfg.window) + " and guard " + std::to_string(cfg.guard));
    const RVec pre = detail::prefix_sums(cut);
    DetectionReport r;
    r.detected.assign(n, false);
    r.threshold.resize(n);
    r.noise_level.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z = detail::so_noise_level(pre, n, i, cfg.window, cfg.guard);
        r.noise_level[i] = z;
        r.threshold[i] = cfg.factor * z;
        if (cut[i] > r.threshold[i]) {
            r.detected[i] = true;
            r.bins.push_back(i);
        }
    }
    return r;
}

/// Ratios cut[i] / SO-noise-level[i] for every cell; a cell is declared when its ratio exceeds the factor.
inline RVec so_cfar_ratios(const RVec& cut, std::size_t window, std::size_t guard)
{
    const RVec pre = detail::prefix_sums(cut);
    RVec r(cut.size());
    for (std::size_t i = 0; i < cut.size(); ++i) {
        const double z = detail::so_noise_level(pre, cut.size(), i, window, guard);
        r[i] = z > 0.0 ? cut[i] / z : kInf;
    }
    return r;
}

enum class CalibrationMode { Nominal, Pipeline };

/// Noise-only cells for calibration: `cells_per_trial` cells per trial.
using NoiseModel = std::function<RVec(Rng&)>;

/// Unit-mean exponential cells (squared magnitude of circular complex Gaussian noise).
inline NoiseModel exponential_noise(std::size_t cells)
{
    return [cells](Rng& rng) {
        std::exponential_distribution<double> ex(1.0);
        RVec v(cells);
        for (auto& x : v) x = ex(rng);
        return v;
    };
}

struct CalibrationResult {
    double factor = 0.0;
    double achieved_pfa = 0.0;
    std::size_t cell_tests = 0;
    std::size_t iterations = 0;
};

/// Bisection on the threshold factor until the empirical false-alarm rate of
/// the noise model matches cfg.pfa within 10 % relative.
inline CalibrationResult calibrate_cfar(const CfarConfig& cfg, const NoiseModel& noise, std::size_t trials,
                                        const SeedStream& seeds, ParallelOptions par = {})
{
    cfg.validate(false);
    if (trials == 0) throw ConfigError("calibrate_cfar: trials must be >= 1");
    // Ratios are collected once; every bisection step then re-counts them.
    std::vector<RVec> blocks = parallel_map(
        (trials + kTrialBlock - 1) / kTrialBlock,
        [&](std::size_t b) {
            RVec out;
            for (std::size_t t = b * kTrialBlock; t < std::min(trials, (b + 1) * kTrialBlock); ++t) {
                Rng rng = seeds.rng(t);
                const RVec cut = noise(rng);
                if (cut.size() < cfg.min_length())
                    throw ConfigError("calibrate_cfar: noise cut shorter than the CFAR footprint");
                const RVec r = so_cfar_ratios(cut, cfg.window, cfg.guard);
                out.insert(out.end(), r.begin(), r.end());
            }
            return out;
        },
        par.workers);
    RVec ratios;
    for (auto& b : blocks) ratios.insert(ratios.end(), b.begin(), b.end());
    const double n = static_cast<double>(ratios.size());
    if (n * cfg.pfa < 100.0)
        throw ConfigError("calibrate_cfar: " + std::to_string(ratios.size()) + " cell tests give fewer than 100 expected false alarms at P_fa = " +
                          std::to_string(cfg.pfa));
    std::sort(ratios.begin(), ratios.end());
    auto pfa_at = [&](double f) {
        const auto it = std::upper_bound(ratios.begin(), ratios.end(), f);
        return static_cast<double>(ratios.end() - it) / n;
    };

    CalibrationResult res;
    res.cell_tests = ratios.size();
    double lo = 0.0, hi = 1.0;
    while (pfa_at(hi) > cfg.pfa) {
        hi *= 2.0;
        if (hi > 1e12) throw NumericError("calibrate_cfar: could not bracket the threshold factor");
    }
    if (pfa_at(lo) < cfg.pfa) throw NumericError("calibrate_cfar: target P_fa not bracketed");
    for (res.iterations = 0; res.iterations < 200; ++res.iterations) {
        const double mid = 0.5 * (lo + hi);
        if (pfa_at(mid) > cfg.pfa)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-12 * hi) break;
    }
    res.factor = hi;
    res.achieved_pfa = pfa_at(hi);
    if (std::abs(res.achieved_pfa - cfg.pfa) > 0.1 * cfg.pfa)
        throw NumericError("calibrate_cfar: empirical P_fa " + std::to_string(res.achieved_pfa) +
                           " cannot be brought within 10% of " + std::to_string(cfg.pfa));
    return res;
}

// ---------------------------------------------------------------------------
// Probability of detection

struct PdScenario {
    ConstellationSpec constellation{Scheme::PSK, 16};
    FrameConfig frame{64, 1, 16, 1.0};
    PaConfig pa = PaConfig::sel_ibo_db(1.0);
    std::vector<Target> targets{{cplx(1.0, 0.0), 4, 0.0}, {cplx(std::pow(10.0, -10.0 / 20.0), 0.0), 8, 0.0}};
    std::size_t weak_bin = 8;
    bool distortion_limited = false;
    CfarConfig cfar{};
    CalibrationMode calibration = CalibrationMode::Nominal;
    std::size_t calibration_trials = 40000;
    std::size_t zero_padding = 1;  // N_Per = zero_padding * N, M_Per = zero_padding * M

    std::string label() const
    {
        std::string s = constellation.name();
        s += pa.linear ? " linear" : " IBO " + std::to_string(pa.ibo_db()).substr(0, 4) + " dB";
        if (distortion_limited) s += " distortion-limited";
        return s;
    }
};

struct PdCurve {
    std::string label;
    RVec snr_db;
    RVec pd;
    RVec ci_halfwidth;
    std::vector<std::size_t> detections;
    std::size_t trials = 0;
    double factor = 0.0;
};

/// Wilson score interval half-width (95 %).
inline double wilson_halfwidth(std::size_t successes, std::size_t n, double z = 1.959963984540054)
{
    if (n == 0) return 0.0;
    const double N = static_cast<double>(n);
    const double p = static_cast<double>(successes) / N;
    const double den = 1.0 + z * z / N;
    return z * std::sqrt(p * (1.0 - p) / N + z * z / (4.0 * N * N)) / den;
}

/// Mean transmitted (amplifier output) power that sets sigma_z^2 = power / SNR.
/// For the limiter this is |G alpha|^2 sigma^2 (1 - e^{-Y^2}) under a Gaussian input.
inline double transmit_signal_power(const PaConfig& pa)
{
    if (pa.linear) return std::norm(pa.G) * pa.sigma2;
    const double a = pa.alpha();
    const double Y = pa.clip_threshold();
    return std::norm(pa.G) * a * a * pa.sigma2 * -std::expm1(-Y * Y);
}

/// One pipeline realization: frame -> PA -> channel + noise -> division filter -> zero-Doppler range cut.
inline RVec pd_range_cut(const PdScenario& sc, const Constellation& c, double noise_variance, Rng& rng)
{
    const TxFrame tx = make_frame(c, BasisKind::OFDM_DFT, sc.frame, rng);
    const Frame amplified = sel_amplify(tx.time, sc.pa);
    ChannelConfig ch;
    ch.targets = sc.targets;
    ch.noise_variance = noise_variance;
    ch.distortion_limited = sc.distortion_limited;
    const Frame rx = apply_channel(amplified, ch, rng);
    return range_profile(division_filter(rx, tx.freq), sc.zero_padding * sc.frame.N);
}

/// Threshold factor for a scenario: the configured one, else calibrated.
inline CalibrationResult scenario_cfar_factor(const PdScenario& sc, const SeedStream& seeds, ParallelOptions par = {})
{
    if (sc.cfar.factor > 0.0) return {sc.cfar.factor, sc.cfar.pfa, 0, 0};
    const std::size_t cells = sc.zero_padding * sc.frame.N;
    if (sc.calibration == CalibrationMode::Nominal)
        return calibrate_cfar(sc.cfar, exponential_noise(cells), sc.calibration_trials, seeds.child("cfar-nominal"), par);
    // Pipeline mode: noise-only runs through the same receiver with a linear amplifier.
    PdScenario noise_only = sc;
    noise_only.targets.clear();
    noise_only.pa = PaConfig::linear_pa(sc.pa.G);
    noise_only.distortion_limited = false;
    const Constellation c(sc.constellation);
    const double sigma_z2 = transmit_signal_power(noise_only.pa);
    NoiseModel model = [noise_only, c, sigma_z2](Rng& rng) { return pd_range_cut(noise_only, c, sigma_z2, rng); };
    return calibrate_cfar(sc.cfar, model, sc.calibration_trials, seeds.child("cfar-pipeline"), par);
}

/// Fraction of trials in which the weak target's cell is declared by the SO-CFAR.
inline PdCurve pd_experiment(const PdScenario& sc, const RVec& snr_db, std::size_t trials, const SeedStream& seeds,
                             ParallelOptions par = {})
{
    sc.frame.validate();
    sc.pa.validate();
    if (trials == 0) throw ConfigError("pd_experiment: trials must be >= 1");
    if (snr_db.empty()) throw ConfigError("pd_experiment: empty SNR grid");
    CfarConfig cfar = sc.cfar;
    cfar.factor = scenario_cfar_factor(sc, seeds, par).factor;
    const Constellation c(sc.constellation);
    const double power = transmit_signal_power(sc.pa);
    const std::size_t bin = sc.weak_bin * sc.zero_padding;
    const std::size_t tol = sc.zero_padding > 1 ? 1 : 0;

    PdCurve curve;
    curve.label = sc.label();
    curve.snr_db = snr_db;
    curve.trials = trials;
    curve.factor = cfar.factor;
    std::size_t dl_hits = 0;
    for (std::size_t i = 0; i < snr_db.size(); ++i) {
        std::size_t hits = 0;
        if (sc.distortion_limited && i > 0) {
            hits = dl_hits;  // noise-free: identical realizations at every grid point
        } else {
            const double sigma_z2 = power / db_to_linear(snr_db[i]);
            const SeedStream point = sc.distortion_limited ? seeds.child("pd") : seeds.child("pd").child(i);
            hits = reduce_trials(
                trials, [] { return std::size_t{0}; },
                [&](std::size_t& acc, std::size_t t) {
                    Rng rng = point.rng(t);
                    const RVec cut = pd_range_cut(sc, c, sigma_z2, rng);
                    if (so_cfar(cut, cfar).hit(bin, tol)) ++acc;
                },
                [](std::size_t& into, std::size_t from) { into += from; }, par);
            dl_hits = hits;
        }
        curve.detections.push_back(hits);
        curve.pd.push_back(static_cast<double>(hits) / static_cast<double>(trials));
        curve.ci_halfwidth.push_back(wilson_halfwidth(hits, trials));
    }
    return curve;
}

/// SNR (dB) at which a rising Pd curve first reaches `level`, linearly
/// interpolated between grid points; nan when the curve never gets there.
inline double snr_at_pd(const RVec& snr_db, const RVec& pd, double level)
{
    if (snr_db.size() != pd.size()) throw DimensionError("snr_at_pd: grid and Pd sizes differ");
    for (std::size_t i = 0; i < pd.size(); ++i) {
        if (pd[i] < level) continue;
        if (i == 0) return snr_db[0];
        const double t = (level - pd[i - 1]) / (pd[i] - pd[i - 1]);
        return snr_db[i - 1] + t * (snr_db[i] - snr_db[i - 1]);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace isacaf
