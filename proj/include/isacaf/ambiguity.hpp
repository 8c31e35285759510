// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Discrete periodic / aperiodic ambiguity functions
//
//   A_{a,b}(l,k) = 1/sqrt(N) sum_p a(p) b^*(p-l) e^{-j 2 pi k p / K}
//
// with p - l taken modulo N (periodic) or zero-extended (aperiodic). For
// K = N the phase is the usual e^{-j 2 pi kp/N}; K > N zero-pads the lag
// product, K < N folds it modulo K.

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "isacaf/core.hpp"
#include "isacaf/fft.hpp"
#include "isacaf/pa.hpp"
#include "isacaf/parallel.hpp"
#include "isacaf/random.hpp"
#include "isacaf/signaling.hpp"

namespace isacaf {

enum class AfMode { Periodic, Aperiodic };

inline std::string mode_name(AfMode m) { return m == AfMode::Periodic ? "periodic" : "aperiodic"; }

/// Delay axis: 0..N-1 for periodic, 1-N..N-1 for aperiodic.
inline std::vector<long> delay_axis(std::size_t n, AfMode mode)
{
    std::vector<long> lags;
    const long N = static_cast<long>(n);
    if (mode == AfMode::Periodic)
        for (long l = 0; l < N; ++l) lags.push_back(l);
    else
        for (long l = 1 - N; l < N; ++l) lags.push_back(l);
    return lags;
}

/// Complex cross ambiguity grid, lag-major: values[i * K + k].
struct ComplexAf {
    CVec values;
    std::vector<long> lags;
    std::size_t K = 0;
    std::size_t n = 0;
    AfMode mode = AfMode::Periodic;

    std::size_t lag_index(long l) const
    {
        const long first = lags.empty() ? 0 : lags.front();
        const long i = l - first;
        if (i < 0 || i >= static_cast<long>(lags.size())) throw DimensionError("lag " + std::to_string(l) + " outside the delay axis");
        return static_cast<std::size_t>(i);
    }
    cplx at(long l, std::size_t k) const { return values[lag_index(l) * K + k]; }
};

/// |A(l,k)|^2 on a (delay x Doppler) grid.
struct AmbiguitySurface {
    RVec values;
    std::vector<long> lags;
    std::size_t K = 0;
    std::size_t n = 0;
    AfMode mode = AfMode::Periodic;
    bool normalized = false;
    double scale = 1.0;  // divisor applied by normalization; values * scale restores the raw grid

    std::size_t lag_index(long l) const
    {
        const long i = l - lags.front();
        if (i < 0 || i >= static_cast<long>(lags.size())) throw DimensionError("lag " + std::to_string(l) + " outside the delay axis");
        return static_cast<std::size_t>(i);
    }
    double at(long l, std::size_t k) const { return values[lag_index(l) * K + k]; }
    double& at(long l, std::size_t k) { return values[lag_index(l) * K + k]; }

    /// Divide by the (0,0) value.
    void normalize()
    {
        const double peak = at(0, 0) * (normalized ? scale : 1.0);
        if (!(peak > 0.0)) throw NumericError("cannot normalize a surface with zero mainlobe");
        const double factor = normalized ? scale / peak : 1.0 / peak;
        for (auto& v : values) v *= factor;
        scale = peak;
        normalized = true;
    }
};

/// Zero-Doppler cut |A(l,0)|^2 with its delay axis.
struct DelayCut {
    std::vector<long> lags;
    RVec values;
    AfMode mode = AfMode::Periodic;

    double at(long l) const { return values.at(static_cast<std::size_t>(l - lags.front())); }
};

/// Zero-delay cut |A(0,k)|^2, k = 0..K-1.
struct DopplerCut {
    RVec values;
    std::size_t K = 0;
    std::size_t n = 0;
};

namespace detail {

inline void check_pair(const CVec& a, const CVec& b, std::size_t K)
{
    if (a.size() < 2) throw DimensionError("ambiguity: signal length must be >= 2");
    if (a.size() != b.size()) throw DimensionError("ambiguity: signals differ in length");
    if (K < 1) throw ConfigError("ambiguity: Doppler grid K must be >= 1");
}

inline std::size_t fft_size_for_linear(std::size_t n)
{
    std::size_t m = 1;
    while (m < 2 * n) m <<= 1;
    return m;
}

} // namespace detail

/// Full complex cross-ambiguity grid of (a, b).
inline ComplexAf cross_af(const CVec& a, const CVec& b, std::size_t K, AfMode mode)
{
    detail::check_pair(a, b, K);
    const std::size_t n = a.size();
    const long N = static_cast<long>(n);
    ComplexAf out;
    out.lags = delay_axis(n, mode);
    out.K = K;
    out.n = n;
    out.mode = mode;
    out.values.assign(out.lags.size() * K, cplx{});
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    CVec buf(K);
    for (std::size_t i = 0; i < out.lags.size(); ++i) {
        const long l = out.lags[i];
        std::fill(buf.begin(), buf.end(), cplx{});
        for (long p = 0; p < N; ++p) {
            long q = p - l;
            if (mode == AfMode::Periodic) {
                q %= N;
                if (q < 0) q += N;
            } else if (q < 0 || q >= N) {
                continue;
            }
            buf[static_cast<std::size_t>(p) % K] += a[static_cast<std::size_t>(p)] * std::conj(b[static_cast<std::size_t>(q)]);
        }
        fft::forward(buf);
        for (std::size_t k = 0; k < K; ++k) out.values[i * K + k] = buf[k] * s;
    }
    return out;
}

inline ComplexAf self_af(const CVec& s, std::size_t K, AfMode mode) { return cross_af(s, s, K, mode); }

inline AmbiguitySurface squared(const ComplexAf& af)
{
    AmbiguitySurface out;
    out.lags = af.lags;
    out.K = af.K;
    out.n = af.n;
    out.mode = af.mode;
    out.values.resize(af.values.size());
    for (std::size_t i = 0; i < af.values.size(); ++i) out.values[i] = std::norm(af.values[i]);
    return out;
}

/// Periodic ambiguity surface |A(l,k)|^2, lags 0..N-1.
inline AmbiguitySurface paf(const TimeSignal& s, std::size_t K)
{
    return squared(self_af(s.samples, K, AfMode::Periodic));
}

/// Aperiodic ambiguity surface |A(l,k)|^2, lags 1-N..N-1.
inline AmbiguitySurface aaf(const TimeSignal& s, std::size_t K)
{
    return squared(self_af(s.samples, K, AfMode::Aperiodic));
}

/// Complex zero-Doppler cross-correlation 1/sqrt(N) sum_p a(p) b^*(p-l) via FFT.
inline CVec zero_doppler_cross(const CVec& a, const CVec& b, AfMode mode)
{
    detail::check_pair(a, b, 1);
    const std::size_t n = a.size();
    const std::size_t m = mode == AfMode::Periodic ? n : detail::fft_size_for_linear(n);
    CVec fa(m), fb(m);
    std::copy(a.begin(), a.end(), fa.begin());
    std::copy(b.begin(), b.end(), fb.begin());
    fft::forward(fa);
    fft::forward(fb);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= std::conj(fb[i]);
    fft::inverse(fa);
    const double s = 1.0 / (static_cast<double>(m) * std::sqrt(static_cast<double>(n)));
    if (mode == AfMode::Periodic) {
        for (auto& v : fa) v *= s;
        return fa;
    }
    CVec out(2 * n - 1);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const long l = static_cast<long>(i) - static_cast<long>(n - 1);
        const std::size_t idx = l >= 0 ? static_cast<std::size_t>(l) : m - static_cast<std::size_t>(-l);
        out[i] = fa[idx] * s;
    }
    return out;
}

/// Complex zero-delay cut 1/sqrt(N) sum_p a(p) b^*(p) e^{-j 2 pi k p / K}.
inline CVec zero_delay_cross(const CVec& a, const CVec& b, std::size_t K)
{
    detail::check_pair(a, b, K);
    CVec buf(K);
    for (std::size_t p = 0; p < a.size(); ++p) buf[p % K] += a[p] * std::conj(b[p]);
    fft::forward(buf);
    const double s = 1.0 / std::sqrt(static_cast<double>(a.size()));
    for (auto& v : buf) v *= s;
    return buf;
}

inline DelayCut zero_doppler_cut(const AmbiguitySurface& surface)
{
    DelayCut c;
    c.lags = surface.lags;
    c.mode = surface.mode;
    c.values.resize(surface.lags.size());
    for (std::size_t i = 0; i < c.values.size(); ++i) c.values[i] = surface.values[i * surface.K];
    return c;
}

inline DopplerCut zero_delay_cut(const AmbiguitySurface& surface)
{
    DopplerCut c;
    c.K = surface.K;
    c.n = surface.n;
    const std::size_t i0 = surface.lag_index(0);
    c.values.assign(surface.values.begin() + static_cast<std::ptrdiff_t>(i0 * surface.K),
                    surface.values.begin() + static_cast<std::ptrdiff_t>((i0 + 1) * surface.K));
    return c;
}

/// |A(l,0)|^2 of one signal without building the full grid.
inline DelayCut zero_doppler_cut(const TimeSignal& s, AfMode mode)
{
    DelayCut c;
    c.mode = mode;
    c.lags = delay_axis(s.size(), mode);
    const CVec a = zero_doppler_cross(s.samples, s.samples, mode);
    c.values.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c.values[i] = std::norm(a[i]);
    return c;
}

/// |A(0,k)|^2 of one signal without building the full grid.
inline DopplerCut zero_delay_cut(const TimeSignal& s, std::size_t K)
{
    DopplerCut c;
    c.K = K;
    c.n = s.size();
    const CVec a = zero_delay_cross(s.samples, s.samples, K);
    c.values.resize(K);
    for (std::size_t k = 0; k < K; ++k) c.values[k] = std::norm(a[k]);
    return c;
}

/// Signal generator used by the Monte-Carlo averages: one realization per call.
using SignalSource = std::function<CVec(Rng&)>;

/// Draw N symbols, map them on the basis and pass them through the amplifier.
inline SignalSource symbol_source(ConstellationSpec constellation, BasisKind basis, std::size_t N, PaConfig pa)
{
    pa.validate();
    const SignalingBasis b(basis, N);
    return [c = Constellation(constellation), b, N, pa](Rng& rng) {
        return sel_amplify(synthesize(b, draw_symbols(c, N, rng)).samples, pa);
    };
}

/// Same as `symbol_source`, but the cyclic prefix is kept on the transmitted
/// symbol so that the aperiodic AF sees N + L samples.
inline SignalSource cp_symbol_source(ConstellationSpec constellation, BasisKind basis, std::size_t N, std::size_t L,
                                     PaConfig pa)
{
    pa.validate();
    const SignalingBasis b(basis, N);
    return [c = Constellation(constellation), b, N, L, pa](Rng& rng) {
        return sel_amplify(add_cp(synthesize(b, draw_symbols(c, N, rng)), L).samples, pa);
    };
}

/// Average of squared AFs over independent realizations, peak-normalized at (0,0).
inline AmbiguitySurface average_af(const SignalSource& source, std::size_t trials, std::size_t K, AfMode mode,
                                   const SeedStream& seeds, ParallelOptions par = {})
{
    if (trials == 0) throw ConfigError("average_af: trials must be >= 1");
    std::size_t len = 0;
    {
        Rng probe = seeds.rng(0);
        len = source(probe).size();
    }
    const std::size_t cells = delay_axis(len, mode).size() * K;
    RVec sum = reduce_trials(
        trials, [&] { return RVec(cells, 0.0); },
        [&](RVec& acc, std::size_t t) {
            Rng rng = seeds.rng(t);
            const ComplexAf af = self_af(source(rng), K, mode);
            for (std::size_t i = 0; i < cells; ++i) acc[i] += std::norm(af.values[i]);
        },
        [](RVec& into, const RVec& from) { add_into(into, from); }, par);
    AmbiguitySurface out;
    out.lags = delay_axis(len, mode);
    out.K = K;
    out.n = len;
    out.mode = mode;
    out.values = std::move(sum);
    for (auto& v : out.values) v /= static_cast<double>(trials);
    out.normalize();
    return out;
}

/// Monte-Carlo mean of a cut together with per-bin standard errors (unnormalized).
struct CutAverage {
    RVec mean;
    RVec sem;
    std::size_t trials = 0;

    /// Mean and standard errors divided by the value at `peak_index`.
    CutAverage normalized(std::size_t peak_index) const
    {
        const double p = mean.at(peak_index);
        if (!(p > 0.0)) throw NumericError("cannot normalize a cut with zero mainlobe");
        CutAverage c = *this;
        for (auto& v : c.mean) v /= p;
        for (auto& v : c.sem) v /= p;
        return c;
    }
};

namespace detail {

struct MomentSums {
    RVec s1, s2;
};

template <class CutFn>
CutAverage average_cut(std::size_t trials, std::size_t bins, CutFn cut, ParallelOptions par)
{
    if (trials == 0) throw ConfigError("average: trials must be >= 1");
    MomentSums m = reduce_trials(
        trials, [&] { return MomentSums{RVec(bins, 0.0), RVec(bins, 0.0)}; },
        [&](MomentSums& acc, std::size_t t) {
            const RVec v = cut(t);
            for (std::size_t i = 0; i < bins; ++i) {
                acc.s1[i] += v[i];
                acc.s2[i] += v[i] * v[i];
            }
        },
        [](MomentSums& into, const MomentSums& from) {
            add_into(into.s1, from.s1);
            add_into(into.s2, from.s2);
        },
        par);
    CutAverage out;
    out.trials = trials;
    out.mean.resize(bins);
    out.sem.resize(bins);
    const double T = static_cast<double>(trials);
    for (std::size_t i = 0; i < bins; ++i) {
        const double mu = m.s1[i] / T;
        const double var = trials > 1 ? std::max(0.0, (m.s2[i] - T * mu * mu) / (T - 1.0)) : 0.0;
        out.mean[i] = mu;
        out.sem[i] = std::sqrt(var / T);
    }
    return out;
}

} // namespace detail

/// Averaged zero-Doppler cut E|A(l,0)|^2 over `delay_axis(len, mode)`.
inline CutAverage average_zero_doppler_cut(const SignalSource& source, std::size_t trials, AfMode mode,
                                           const SeedStream& seeds, ParallelOptions par = {})
{
    Rng probe = seeds.rng(0);
    const std::size_t len = source(probe).size();
    const std::size_t bins = delay_axis(len, mode).size();
    return detail::average_cut(
        trials, bins,
        [&](std::size_t t) {
            Rng rng = seeds.rng(t);
            return zero_doppler_cut(TimeSignal{source(rng), 0}, mode).values;
        },
        par);
}

/// Averaged zero-delay cut E|A(0,k)|^2, k = 0..K-1.
inline CutAverage average_zero_delay_cut(const SignalSource& source, std::size_t trials, std::size_t K,
                                         const SeedStream& seeds, ParallelOptions par = {})
{
    return detail::average_cut(
        trials, K,
        [&](std::size_t t) {
            Rng rng = seeds.rng(t);
            return zero_delay_cut(TimeSignal{source(rng), 0}, K).values;
        },
        par);
}

struct SidelobeMetrics {
    double isl = 0.0;           // sum over the stored lags l != 0
    double isl_two_sided = 0.0; // sum over l = 1-N..N-1, l != 0 (periodic lags counted on both sides)
    double eislr = 0.0;         // isl_two_sided / mainlobe
    double pslr = 0.0;          // max sidelobe / mainlobe
    double mainlobe = 0.0;
    double mean_sidelobe = 0.0; // isl / number of sidelobe lags, relative to the mainlobe
    std::size_t sidelobe_lags = 0;
};

inline SidelobeMetrics sidelobe_metrics(const DelayCut& cut)
{
    SidelobeMetrics m;
    double peak_side = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < cut.lags.size(); ++i) {
        const double v = cut.values[i];
        if (v != 0.0) any = true;
        if (cut.lags[i] == 0) {
            m.mainlobe = v;
            continue;
        }
        m.isl += v;
        peak_side = std::max(peak_side, v);
        ++m.sidelobe_lags;
    }
    if (!any) throw NumericError("sidelobe metrics of an all-zero cut are undefined");
    if (!(m.mainlobe > 0.0)) throw NumericError("sidelobe metrics need a positive mainlobe");
    m.isl_two_sided = cut.mode == AfMode::Periodic ? 2.0 * m.isl : m.isl;
    m.eislr = m.isl_two_sided / m.mainlobe;
    m.pslr = peak_side / m.mainlobe;
    m.mean_sidelobe = m.sidelobe_lags ? m.isl / static_cast<double>(m.sidelobe_lags) / m.mainlobe : 0.0;
    return m;
}

inline SidelobeMetrics sidelobe_metrics(const AmbiguitySurface& surface)
{
    DelayCut c = zero_doppler_cut(surface);
    if (surface.normalized)
        for (auto& v : c.values) v *= surface.scale;
    return sidelobe_metrics(c);
}

/// Metrics of an averaged cut on the given delay axis.
inline SidelobeMetrics sidelobe_metrics(const CutAverage& avg, std::size_t len, AfMode mode)
{
    return sidelobe_metrics(DelayCut{delay_axis(len, mode), avg.mean, mode});
}

} // namespace isacaf
