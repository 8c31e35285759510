// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Named experiment scenarios and the runner that writes their CSVs, optional
// SVG plots and a run manifest.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "isacaf/ambiguity.hpp"
#include "isacaf/analytic.hpp"
#include "isacaf/channel.hpp"
#include "isacaf/detect.hpp"
#include "isacaf/experiments/config.hpp"
#include "isacaf/experiments/csv.hpp"
#include "isacaf/experiments/manifest.hpp"
#include "isacaf/experiments/plot.hpp"
#include "isacaf/pa.hpp"
#include "isacaf/radar.hpp"

namespace isacaf::experiments {

struct ScenarioOutput {
    std::vector<std::pair<std::string, CsvTable>> tables;
    std::vector<PlotSpec> plots;

    void add(std::string name, CsvTable t) { tables.emplace_back(std::move(name), std::move(t)); }
    const CsvTable& table(const std::string& name) const
    {
        for (const auto& [n, t] : tables)
            if (n == name) return t;
        throw ConfigError("scenario output has no table '" + name + "'");
    }
};

struct ScenarioContext {
    const ExperimentConfig& cfg;
    SeedStream seeds;
    ParallelOptions par;
};

struct Scenario {
    std::string name;
    std::string figure;
    std::string description;
    std::string runtime;  // rough single-worker runtime at default settings
    std::function<void(const ScenarioContext&, ScenarioOutput&)> run;
};

namespace detail {

/// Short column tag: "psk", "qam", "qam64", "psk8" (order 16 is implied).
inline std::string tag(ConstellationSpec c)
{
    std::string t = c.scheme == Scheme::PSK ? "psk" : "qam";
    if (c.order != 16) t += std::to_string(c.order);
    return t;
}

inline std::string ibo_tag(double db) { return "ibo" + format_number(db); }

inline double rel_db(double v, double ref) { return to_db_clamped(v / ref); }

/// |kappa|^2 sigma^2 / sigma_d^2: power of the scaled useful component over the distortion power.
inline double useful_sdr(const BussgangStats& st)
{
    return st.sigma_d2 > 0.0 ? std::norm(st.kappa) * st.sigma2 / st.sigma_d2 : kInf;
}

inline const std::vector<ConstellationSpec> kPskQam{{Scheme::PSK, 16}, {Scheme::QAM, 16}};

// ----------------------------------------------------------------------------
// Zero-Doppler cuts with overlays

struct OverlayCuts {
    RVec linear, nonlinear, sel;
};

/// Averaged |A(l,0)|^2 of the linear and limited outputs of the same symbols,
/// with the averaged conditioned-cut prediction.
inline OverlayCuts overlay_cuts(ConstellationSpec cs, std::size_t N, const PaConfig& lin, const PaConfig& nl, AfMode mode,
                                std::size_t trials, const SeedStream& seeds, ParallelOptions par)
{
    const Constellation c(cs);
    const SignalingBasis b(BasisKind::OFDM_DFT, N);
    const SelWeights w = sel_weights(nl.clip_threshold(), LagCorrelation::independent(N), N - 1);
    const std::size_t bins = delay_axis(N, mode).size();
    OverlayCuts acc = reduce_trials(
        trials, [&] { return OverlayCuts{RVec(bins, 0.0), RVec(bins, 0.0), RVec(bins, 0.0)}; },
        [&](OverlayCuts& a, std::size_t t) {
            Rng rng = seeds.rng(t);
            const CVec x = synthesize(b, draw_symbols(c, N, rng)).samples;
            const CVec sl = sel_amplify(x, lin), sn = sel_amplify(x, nl);
            const CVec al = zero_doppler_cross(sl, sl, mode), an = zero_doppler_cross(sn, sn, mode);
            const CVec ap = sel_zero_doppler_cut(x, nl, w, mode);
            for (std::size_t i = 0; i < bins; ++i) {
                a.linear[i] += std::norm(al[i]);
                a.nonlinear[i] += std::norm(an[i]);
                a.sel[i] += std::norm(ap[i]);
            }
        },
        [](OverlayCuts& into, const OverlayCuts& from) {
            add_into(into.linear, from.linear);
            add_into(into.nonlinear, from.nonlinear);
            add_into(into.sel, from.sel);
        },
        par);
    const double T = static_cast<double>(trials);
    for (RVec* v : {&acc.linear, &acc.nonlinear, &acc.sel})
        for (auto& x : *v) x /= T;
    return acc;
}

inline void zero_doppler_scenario(const ScenarioContext& ctx, ScenarioOutput& out, AfMode mode)
{
    const auto& cfg = ctx.cfg;
    const std::size_t N = cfg.N;
    const std::size_t trials = cfg.trials_or(2000);
    const PaConfig lin = cfg.pa.linear(), nl = cfg.pa.nonlinear();
    const auto lags = delay_axis(N, mode);
    const std::size_t zero = mode == AfMode::Periodic ? 0 : N - 1;
    const auto cons = cfg.constellations_or(kPskQam);

    std::vector<std::string> header{"lag"};
    std::vector<RVec> cols;
    for (const auto& cs : cons) {
        const std::string t = tag(cs);
        const SeedStream s = ctx.seeds.child(cs.name());
        const OverlayCuts cut = overlay_cuts(cs, N, lin, nl, mode, trials, s, ctx.par);
        const BussgangStats st =
            estimate_bussgang(nl, SignalingBasis(BasisKind::OFDM_DFT, N), cs, trials, s.child("bussgang"), ctx.par);
        const BussgangExpectation be = expected_zero_doppler_bussgang(st.kappa, st.sigma2, st.sigma_d2, N, st.d4);
        RVec l(lags.size()), n(lags.size()), a(lags.size()), bg(lags.size());
        for (std::size_t i = 0; i < lags.size(); ++i) {
            l[i] = rel_db(cut.linear[i], cut.linear[zero]);
            n[i] = rel_db(cut.nonlinear[i], cut.nonlinear[zero]);
            a[i] = rel_db(cut.sel[i], cut.sel[zero]);
            // Flat Bussgang sidelobe expectation against the simulated mainlobe.
            bg[i] = i == zero ? 0.0 : rel_db(be.per_lag, cut.nonlinear[zero]);
        }
        for (auto&& [name, col] : {std::pair{"linear_" + t, l}, std::pair{"nonlinear_" + t + "_" + ibo_tag(cfg.pa.ibo_db), n},
                                   std::pair{"analytic_sel_" + t, a}, std::pair{"analytic_bussgang_" + t, bg}}) {
            header.push_back(name);
            cols.push_back(col);
        }
    }
    CsvTable table(header);
    for (std::size_t i = 0; i < lags.size(); ++i) {
        std::vector<CsvTable::Cell> row{static_cast<double>(lags[i])};
        for (const auto& c : cols) row.push_back(c[i]);
        table.add_row(std::move(row));
    }
    out.add("zero_doppler.csv", std::move(table));
    out.plots.push_back({"zero_doppler.svg", "zero_doppler.csv", "lag", {},
                         std::string("Zero-Doppler cut (") + mode_name(mode) + ")", "normalized |A(l,0)|^2 [dB]"});
}

// ----------------------------------------------------------------------------
// Distortion power and the isolated distortion term

inline void distortion_power(const ScenarioContext& ctx, ScenarioOutput& out)
{
    const auto& cfg = ctx.cfg;
    const std::size_t trials = cfg.trials_or(1000);
    RVec ibos = cfg.ibo_sweep_db;
    if (ibos.empty())
        for (int i = 0; i <= 10; ++i) ibos.push_back(i);
    const auto cons = cfg.constellations_or(kPskQam);
    const SignalingBasis b(BasisKind::OFDM_DFT, cfg.N);

    std::vector<std::string> header{"ibo_db"};
    for (const auto& cs : cons) {
        const std::string t = tag(cs);
        header.insert(header.end(), {"sigma_d2_db_" + t, "sdr_db_" + t, "kappa_" + t, "useful_sdr_db_" + t});
    }
    header.insert(header.end(), {"sigma_d2_db_gaussian", "sdr_db_gaussian"});
    CsvTable table(header);
    for (double ibo : ibos) {
        const PaConfig pa = cfg.pa.at_ibo(ibo);
        std::vector<CsvTable::Cell> row{ibo};
        for (const auto& cs : cons) {
            // Same symbol draws at every back-off.
            const BussgangStats st = estimate_bussgang(pa, b, cs, trials, ctx.seeds.child(cs.name()), ctx.par);
            row.insert(row.end(), {to_db_clamped(st.sigma_d2), to_db_clamped(sdr(st, pa), -100.0), std::abs(st.kappa),
                                   to_db_clamped(useful_sdr(st), -100.0)});
        }
        const double lin_power = std::norm(pa.G) * pa.alpha() * pa.alpha() * pa.sigma2;
        const double g = gaussian_distortion_ratio(pa.clip_threshold());
        row.insert(row.end(), {to_db_clamped(g * lin_power), g > 0 ? -linear_to_db(g) : kInf});
        table.add_row(std::move(row));
    }
    out.add("distortion_power.csv", std::move(table));
    std::vector<std::string> ys;
    for (const auto& cs : cons) ys.push_back("sigma_d2_db_" + tag(cs));
    ys.push_back("sigma_d2_db_gaussian");
    out.plots.push_back({"distortion_power.svg", "distortion_power.csv", "ibo_db", ys, "Distortion power vs IBO", "sigma_d^2 [dB]"});
}

inline void distortion_term(const ScenarioContext& ctx, ScenarioOutput& out)
{
    const auto& cfg = ctx.cfg;
    const std::size_t N = cfg.N, trials = cfg.trials_or(2000);
    const PaConfig nl = cfg.pa.nonlinear();
    const SignalingBasis b(BasisKind::OFDM_DFT, N);
    const auto cons = cfg.constellations_or(kPskQam);
    std::vector<std::string> header{"lag"};
    std::vector<RVec> cols;
    for (const auto& cs : cons) {
        const SeedStream s = ctx.seeds.child(cs.name());
        const BussgangStats st = estimate_bussgang(nl, b, cs, trials, s.child("bussgang"), ctx.par);
        const Constellation c(cs);
        struct Acc {
            RVec d, s;
        };
        Acc acc = reduce_trials(
            trials, [&] { return Acc{RVec(N, 0.0), RVec(N, 0.0)}; },
            [&](Acc& a, std::size_t t) {
                Rng rng = s.rng(t);
                const CVec x = synthesize(b, draw_symbols(c, N, rng)).samples;
                const CVec y = sel_amplify(x, nl);
                CVec d(N);
                for (std::size_t i = 0; i < N; ++i) d[i] = y[i] - st.kappa * x[i];
                const CVec ad = zero_doppler_cross(d, d, AfMode::Periodic), as = zero_doppler_cross(y, y, AfMode::Periodic);
                for (std::size_t i = 0; i < N; ++i) {
                    a.d[i] += std::norm(ad[i]);
                    a.s[i] += std::norm(as[i]);
                }
            },
            [](Acc& into, const Acc& from) {
                add_into(into.d, from.d);
                add_into(into.s, from.s);
            },
            ctx.par);
        const double main = acc.s[0];
        RVec dcol(N), scol(N), ecol(N);
        for (std::size_t i = 0; i < N; ++i) {
            dcol[i] = rel_db(acc.d[i], main);
            scol[i] = rel_db(acc.s[i], main);
            ecol[i] = i == 0 ? rel_db(st.sigma_d2 * st.sigma_d2 * N + st.d4 - st.sigma_d2 * st.sigma_d2, main / trials)
                             : rel_db(st.sigma_d2 * st.sigma_d2, main / trials);
        }
        const std::string t = tag(cs);
        header.insert(header.end(), {"distortion_" + t, "total_" + t, "expected_distortion_" + t});
        cols.insert(cols.end(), {dcol, scol, ecol});
    }
    CsvTable table(header);
    for (std::size_t i = 0; i < N; ++i) {
        std::vector<CsvTable::Cell> row{static_cast<double>(i)};
        for (const auto& c : cols) row.push_back(c[i]);
        table.add_row(std::move(row));
    }
    out.add("distortion_term.csv", std::move(table));
    out.plots.push_back({"distortion_term.svg", "distortion_term.csv", "lag", {}, "Distortion term of the zero-Doppler cut",
                         "relative to E|A_s(0,0)|^2 [dB]"});
}

// ----------------------------------------------------------------------------
// Signaling bases

inline void signaling_compare(const ScenarioContext& ctx, ScenarioOutput& out)
{
    const auto& cfg = ctx.cfg;
    const std::size_t N = cfg.N, trials = cfg.trials_or(2000);
    const auto cons = cfg.constellations_or(kPskQam);
    const std::vector<BasisKind> bases =
        cfg.bases.empty() ? std::vector<BasisKind>{BasisKind::OFDM_DFT, BasisKind::SC_IDENTITY, BasisKind::CDMA_HADAMARD} : cfg.bases;
    const PaConfig nl = cfg.pa.nonlinear(), lin = cfg.pa.linear();
    std::vector<std::string> header{"lag"};
    std::vector<RVec> cols;
    CsvTable summary({"basis", "constellation", "mean_sidelobe_db", "mean_sidelobe_linear_db", "pslr_db"});
    for (BasisKind bk : bases) {
        for (const auto& cs : cons) {
            const SeedStream s = ctx.seeds.child(basis_name(bk)).child(cs.name());
            const CutAverage a = average_zero_doppler_cut(symbol_source(cs, bk, N, nl), trials, AfMode::Periodic, s, ctx.par);
            const CutAverage al = average_zero_doppler_cut(symbol_source(cs, bk, N, lin), trials, AfMode::Periodic, s, ctx.par);
            const SidelobeMetrics m = sidelobe_metrics(a, N, AfMode::Periodic);
            const SidelobeMetrics ml = sidelobe_metrics(al, N, AfMode::Periodic);
            RVec col(N);
            for (std::size_t i = 0; i < N; ++i) col[i] = rel_db(a.mean[i], a.mean[0]);
            header.push_back(basis_name(bk) + "_" + tag(cs));
            cols.push_back(col);
            summary.add_row({basis_name(bk), cs.name(), to_db_clamped(m.mean_sidelobe), to_db_clamped(ml.mean_sidelobe),
                             to_db_clamped(m.pslr)});
        }
    }
    CsvTable table(header);
    for (std::size_t i = 0; i < N; ++i) {
        std::vector<CsvTable::Cell> row{static_cast<double>(i)};
        for (const auto& c : cols) row.push_back(c[i]);
        table.add_row(std::move(row));
    }
    out.add("signaling_cuts.csv", std::move(table));
    out.add("signaling_summary.csv", std::move(summary));
    out.plots.push_back({"signaling_cuts.svg", "signaling_cuts.csv", "lag", {}, "Zero-Doppler cut by signaling basis",
                         "normalized |A(l,0)|^2 [dB]"});
}

// ----------------------------------------------------------------------------
// EISL / EISLR / PSLR against N

inline std::vector<std::size_t> n_sweep(const ExperimentConfig& cfg)
{
    return cfg.n_sweep.empty() ? std::vector<std::size_t>{32, 64, 128, 256} : cfg.n_sweep;
}

inline void eisl_scenario(const ScenarioContext& ctx, ScenarioOutput& out, bool ratio)
{
    const auto& cfg = ctx.cfg;
    const std::size_t trials = cfg.trials_or(1000);
    const auto cons = cfg.constellations_or(kPskQam);
    const PaConfig nl = cfg.pa.nonlinear(), lin = cfg.pa.linear();
    const std::string it = ibo_tag(cfg.pa.ibo_db);
    std::vector<std::string> header{"N"};
    for (const auto& cs : cons) {
        const std::string t = tag(cs);
        header.insert(header.end(), {"linear_" + t, "nonlinear_" + t + "_" + it, "analytic_bussgang_" + t,
                                     "analytic_wterm_" + t, "nonlinear_cp_" + t + "_" + it, "analytic_wterm_cp_" + t});
    }
    CsvTable table(header);
    for (std::size_t N : n_sweep(cfg)) {
        std::vector<CsvTable::Cell> row{static_cast<double>(N)};
        for (const auto& cs : cons) {
            const SeedStream s = ctx.seeds.child(cs.name()).child(N);
            const CutAverage al = average_zero_doppler_cut(symbol_source(cs, BasisKind::OFDM_DFT, N, lin), trials,
                                                           AfMode::Aperiodic, s, ctx.par);
            const SidelobeMetrics ml = sidelobe_metrics(al, N, AfMode::Aperiodic);
            const SelEislResult r = sel_eisl(nl, cs, BasisKind::OFDM_DFT, N, trials, s, {}, ctx.par);
            SelEislOptions cp;
            cp.cp_length = std::min(cfg.L, N);
            const SelEislResult rc = sel_eisl(nl, cs, BasisKind::OFDM_DFT, N, trials, s, cp, ctx.par);
            const BussgangStats st =
                estimate_bussgang(nl, SignalingBasis(BasisKind::OFDM_DFT, N), cs, trials, s.child("bussgang"), ctx.par);
            const BussgangExpectation be = expected_zero_doppler_bussgang(st.kappa, st.sigma2, st.sigma_d2, N, st.d4);
            if (ratio) {
                row.insert(row.end(), {to_db_clamped(ml.eislr), to_db_clamped(r.eislr_mc()),
                                       to_db_clamped(be.eisl / r.mainlobe_mc), to_db_clamped(r.eislr()),
                                       to_db_clamped(rc.eislr_mc()), to_db_clamped(rc.eislr())});
            } else {
                row.insert(row.end(), {to_db_clamped(ml.isl_two_sided), to_db_clamped(r.eisl_mc), to_db_clamped(be.eisl),
                                       to_db_clamped(r.eisl), to_db_clamped(rc.eisl_mc), to_db_clamped(rc.eisl)});
            }
        }
        table.add_row(std::move(row));
    }
    const std::string name = ratio ? "eislr.csv" : "eisl.csv";
    out.add(name, std::move(table));
    out.plots.push_back({ratio ? "eislr.svg" : "eisl.svg", name, "N", {}, ratio ? "EISLR vs N" : "EISL vs N",
                         ratio ? "EISLR [dB]" : "EISL [dB]"});
}

inline void pslr_scenario(const ScenarioContext& ctx, ScenarioOutput& out)
{
    const auto& cfg = ctx.cfg;
    const std::size_t trials = cfg.trials_or(2000);
    const auto cons = cfg.constellations_or(kPskQam);
    const PaConfig nl = cfg.pa.nonlinear(), lin = cfg.pa.linear();
    std::vector<std::string> header{"N"};
    for (const auto& cs : cons) header.insert(header.end(), {"linear_" + tag(cs), tag(cs) + "_" + ibo_tag(cfg.pa.ibo_db)});
    CsvTable table(header);
    for (std::size_t N : n_sweep(cfg)) {
        std::vector<CsvTable::Cell> row{static_cast<double>(N)};
        for (const auto& cs : cons) {
            const SeedStream s = ctx.seeds.child(cs.name()).child(N);
            for (const PaConfig* pa : {&lin, &nl}) {
                const CutAverage a = average_zero_doppler_cut(symbol_source(cs, BasisKind::OFDM_DFT, N, *pa), trials,
                                                              AfMode::Periodic, s, ctx.par);
                row.push_back(to_db_clamped(sidelobe_metrics(a, N, AfMode::Periodic).pslr));
            }
        }
        table.add_row(std::move(row));
    }
    out.add("pslr.csv", std::move(table));
    out.plots.push_back({"pslr.svg", "pslr.csv", "N", {}, "PSLR of the averaged zero-Doppler cut", "PSLR [dB]"});
}

// ----------------------------------------------------------------------------
// Zero-delay cuts

inline void zero_delay_scenario(const ScenarioContext& ctx, ScenarioOutput& out)
{
    const auto& cfg = ctx.cfg;
    const std::size_t N = cfg.N, K = cfg.N, trials = cfg.trials_or(2000);
    const auto cons = cfg.constellations_or(kPskQam);
    const RVec ibos = cfg.ibo_sweep_db.empty() ? RVec{0.0, 4.0, 8.0} : cfg.ibo_sweep_db;
    const SignalingBasis b(BasisKind::OFDM_DFT, N);
    std::vector<std::string> header{"doppler_bin"};
    std::vector<RVec> cols;
    for (const auto& cs : cons) {
        const Constellation c(cs);
        const SeedStream s = ctx.seeds.child(cs.name());
        std::vector<PaConfig> pas{cfg.pa.linear()};
        for (double ibo : ibos) pas.push_back(cfg.pa.at_ibo(ibo));
        // Index 0: linear; then per IBO the simulated and the analytic cut.
        const std::size_t ncut = 1 + 2 * ibos.size();
        std::vector<RVec> acc = reduce_trials(
            trials, [&] { return std::vector<RVec>(ncut, RVec(K, 0.0)); },
            [&](std::vector<RVec>& a, std::size_t t) {
                Rng rng = s.rng(t);
                const CVec x = synthesize(b, draw_symbols(c, N, rng)).samples;
                for (std::size_t p = 0; p < pas.size(); ++p) {
                    const CVec y = sel_amplify(x, pas[p]);
                    const CVec z = zero_delay_cross(y, y, K);
                    for (std::size_t k = 0; k < K; ++k) a[p == 0 ? 0 : 2 * p - 1][k] += std::norm(z[k]);
                    if (p == 0) continue;
                    const CVec an = sel_zero_delay_cut(x, pas[p], K);
                    for (std::size_t k = 0; k < K; ++k) a[2 * p][k] += std::norm(an[k]);
                }
            },
            [](std::vector<RVec>& into, const std::vector<RVec>& from) {
                for (std::size_t i = 0; i < into.size(); ++i) add_into(into[i], from[i]);
            },
            ctx.par);
        const std::string t = tag(cs);
        header.push_back("linear_" + t);
        for (double ibo : ibos) {
            header.push_back(t + "_" + ibo_tag(ibo));
            header.push_back("analytic_" + t + "_" + ibo_tag(ibo));
        }
        for (const auto& v : acc) {
            RVec col(K);
            // Centered axis k = -K/2 .. K/2-1.
            for (std::size_t i = 0; i < K; ++i) col[i] = rel_db(v[(i + K - K / 2) % K], v[0]);
            cols.push_back(col);
        }
    }
    CsvTable table(header);
    for (std::size_t i = 0; i < K; ++i) {
        std::vector<CsvTable::Cell> row{static_cast<double>(static_cast<long>(i) - static_cast<long>(K / 2))};
        for (const auto& c : cols) row.push_back(c[i]);
        table.add_row(std::move(row));
    }
    out.add("zero_delay.csv", std::move(table));
    out.plots.push_back({"zero_delay.svg", "zero_delay.csv", "doppler_bin", {}, "Zero-delay cut", "normalized |A(0,k)|^2 [dB]"});
}

// ----------------------------------------------------------------------------
// Radar pipeline

inline void periodogram_scenario(const ScenarioContext& ctx, ScenarioOutput& out)
{
    const auto& cfg = ctx.cfg;
    const ConstellationSpec cs = cfg.constellations_or({{Scheme::PSK, 16}}).front();
    const FrameConfig fc{cfg.N, cfg.M, cfg.L};
    const std::size_t Np = cfg.zero_padding * cfg.N, Mp = cfg.zero_padding * cfg.M;
    std::vector<Periodogram> per;
    for (const PaConfig& pa : {cfg.pa.linear(), cfg.pa.nonlinear()}) {
        Rng rng = ctx.seeds.rng(0);  // same symbols and noise shape for both
        const TxFrame tx = make_frame(Constellation(cs), BasisKind::OFDM_DFT, fc, rng);
        ChannelConfig ch{cfg.targets, transmit_signal_power(pa) / db_to_linear(cfg.snr_point_db), false};
        const Frame rx = apply_channel(sel_amplify(tx.time, pa), ch, rng);
        per.push_back(periodogram(division_filter(rx, tx.freq), Np, Mp));
    }
    auto peak = [](const Periodogram& p) { return *std::max_element(p.values.begin(), p.values.end()); };
    const double pl = peak(per[0]), pn = peak(per[1]);
    CsvTable grid({"delay_bin", "doppler_bin", "linear_db", "nonlinear_db"});
    CsvTable cut({"delay_bin", "linear_db", "nonlinear_db"});
    for (std::size_t l = 0; l < Np; ++l) {
        for (long k = per[0].k_min(); k < per[0].k_min() + static_cast<long>(Mp); ++k)
            grid.add_row({static_cast<double>(l), static_cast<double>(k), rel_db(per[0].at(l, k), pl), rel_db(per[1].at(l, k), pn)});
        cut.add_row({static_cast<double>(l), rel_db(per[0].at(l, 0), pl), rel_db(per[1].at(l, 0), pn)});
    }
    out.add("periodogram.csv", std::move(grid));
    out.add("range_cut.csv", std::move(cut));
    out.plots.push_back({"range_cut.svg", "range_cut.csv", "delay_bin", {}, "Periodogram zero-Doppler range cut",
                         "normalized periodogram [dB]"});
}

inline void cfar_single(const ScenarioContext& ctx, ScenarioOutput& out)
{
    const auto& cfg = ctx.cfg;
    const auto cons = cfg.constellations_or(kPskQam);
    std::vector<std::string> header{"delay_bin"};
    std::vector<RVec> cols;
    CsvTable summary({"constellation", "amplifier", "cfar_factor", "weak_detected", "detected_bins"});
    const std::size_t bin = cfg.weak_bin * cfg.zero_padding;
    for (const auto& cs : cons) {
        for (bool linear : {true, false}) {
            const PdScenario sc = pd_scenario(cfg, cs, linear, false);
            CfarConfig cf = sc.cfar;
            cf.factor = scenario_cfar_factor(sc, ctx.seeds, ctx.par).factor;
            Rng rng = ctx.seeds.child("realization").rng(0);
            const RVec cut = pd_range_cut(sc, Constellation(cs), transmit_signal_power(sc.pa) / db_to_linear(cfg.snr_point_db), rng);
            const DetectionReport r = so_cfar(cut, cf);
            const std::string name = tag(cs) + (linear ? "_linear" : "_" + ibo_tag(cfg.pa.ibo_db));
            RVec c(cut.size()), th(cut.size());
            for (std::size_t i = 0; i < cut.size(); ++i) {
                c[i] = to_db_clamped(cut[i]);
                th[i] = to_db_clamped(r.threshold[i]);
            }
            header.insert(header.end(), {name + "_db", name + "_threshold_db"});
            cols.insert(cols.end(), {c, th});
            std::string bins;
            for (std::size_t b : r.bins) bins += (bins.empty() ? "" : ";") + std::to_string(b);
            summary.add_row({cs.name(), linear ? std::string("linear") : ibo_tag(cfg.pa.ibo_db), cf.factor,
                             r.hit(bin, cfg.zero_padding > 1 ? 1 : 0) ? 1.0 : 0.0, bins});
        }
    }
    CsvTable table(header);
    for (std::size_t i = 0; i < cols[0].size(); ++i) {
        std::vector<CsvTable::Cell> row{static_cast<double>(i)};
        for (const auto& c : cols) row.push_back(c[i]);
        table.add_row(std::move(row));
    }
    out.add("cfar_single.csv", std::move(table));
    out.add("cfar_single_summary.csv", std::move(summary));
    out.plots.push_back({"cfar_single.svg", "cfar_single.csv", "delay_bin", {}, "SO-CFAR on single realizations", "[dB]"});
}

inline CsvTable pd_table(const PdCurve& c)
{
    CsvTable t({"snr_db", "pd", "ci_halfwidth", "trials"});
    for (std::size_t i = 0; i < c.snr_db.size(); ++i)
        t.add_row({c.snr_db[i], c.pd[i], c.ci_halfwidth[i], static_cast<double>(c.trials)});
    return t;
}

inline RVec pd_grid(const ExperimentConfig& cfg)
{
    if (!cfg.snr_db.empty()) return cfg.snr_db;
    RVec g;
    for (int s = 0; s <= 20; ++s) g.push_back(s);
    return g;
}

inline void pd_curves(const ScenarioContext& ctx, ScenarioOutput& out)
{
    const auto& cfg = ctx.cfg;
    const std::size_t trials = cfg.trials_or(1000);
    const RVec grid = pd_grid(cfg);
    const auto cons = cfg.constellations_or({{Scheme::PSK, 16}, {Scheme::QAM, 16}, {Scheme::QAM, 64}});
    const std::string it = ibo_tag(cfg.pa.ibo_db);
    std::vector<std::string> header{"snr_db"};
    std::vector<RVec> cols;
    CsvTable summary(
        {"constellation", "amplifier", "cfar_factor", "plateau", "snr_eff_projected_db", "sdr_db", "useful_sdr_db"});
    for (const auto& cs : cons) {
        PdCurve linear_curve;
        for (int v = 0; v < 3; ++v) {
            const bool linear = v == 0, dl = v == 2;
            const PdScenario sc = pd_scenario(cfg, cs, linear, dl);
            // Shared seeds: every curve sees the same symbols and noise draws.
            const PdCurve c = pd_experiment(sc, grid, trials, ctx.seeds, ctx.par);
            const std::string variant = linear ? "linear" : dl ? it + "_distortion_limited" : it;
            const std::string name = tag(cs) + "_" + variant;
            out.add("pd_" + name + ".csv", pd_table(c));
            header.push_back(name);
            cols.push_back(c.pd);
            if (linear) linear_curve = c;
            const double nan = std::numeric_limits<double>::quiet_NaN();
            double sdr_db = nan, useful_db = nan;
            if (!linear) {
                const BussgangStats st = estimate_bussgang(sc.pa, SignalingBasis(BasisKind::OFDM_DFT, cfg.N), cs, 2000,
                                                           ctx.seeds.child("sdr").child(cs.name()), ctx.par);
                sdr_db = linear_to_db(sdr(st, sc.pa));
                useful_db = linear_to_db(useful_sdr(st));
            }
            // A plateau of 1 is no ceiling, so nothing is projected for it.
            const bool ceiling = dl && c.pd.front() < 1.0;
            summary.add_row({cs.name(), variant, c.factor, dl ? c.pd.front() : nan,
                             ceiling ? snr_at_pd(linear_curve.snr_db, linear_curve.pd, c.pd.front()) : nan, sdr_db, useful_db});
        }
    }
    CsvTable table(header);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<CsvTable::Cell> row{grid[i]};
        for (const auto& c : cols) row.push_back(c[i]);
        table.add_row(std::move(row));
    }
    out.add("pd_curves.csv", std::move(table));
    out.add("pd_summary.csv", std::move(summary));
    out.plots.push_back({"pd_curves.svg", "pd_curves.csv", "snr_db", {}, "Probability of detection of the weak target", "Pd"});
}

} // namespace detail

inline const std::vector<Scenario>& scenario_registry()
{
    static const std::vector<Scenario> registry{
        {"fig-zero-doppler-cp", "Fig. 3", "zero-Doppler cut of CP-OFDM (periodic AF), linear vs limited, with analytic overlays",
         "<1 s", [](const ScenarioContext& c, ScenarioOutput& o) { detail::zero_doppler_scenario(c, o, AfMode::Periodic); }},
        {"fig-zero-doppler-nocp", "Fig. 4", "zero-Doppler cut without CP (aperiodic AF), linear vs limited, with analytic overlays",
         "<1 s", [](const ScenarioContext& c, ScenarioOutput& o) { detail::zero_doppler_scenario(c, o, AfMode::Aperiodic); }},
        {"fig-distortion-power", "Fig. 5", "distortion power, SDR and Bussgang gain vs IBO", "<1 s", detail::distortion_power},
        {"fig-distortion-term", "Fig. 6", "isolated distortion term of the zero-Doppler cut", "<1 s", detail::distortion_term},
        {"fig-signaling-compare", "Figs. 7-8", "OFDM vs single-carrier vs CDMA zero-Doppler sidelobes", "<1 s",
         detail::signaling_compare},
        {"fig-eisl", "Fig. 9", "EISL vs number of subcarriers (simulated, Bussgang and W-term)", "~2 s",
         [](const ScenarioContext& c, ScenarioOutput& o) { detail::eisl_scenario(c, o, false); }},
        {"fig-eislr", "Fig. 10", "EISLR vs number of subcarriers", "~2 s",
         [](const ScenarioContext& c, ScenarioOutput& o) { detail::eisl_scenario(c, o, true); }},
        {"fig-pslr", "Fig. 11", "PSLR vs number of subcarriers", "<1 s", detail::pslr_scenario},
        {"fig-zero-delay", "Fig. zero-delay", "zero-delay (Doppler) cuts for several IBOs, simulated and analytic", "<1 s",
         detail::zero_delay_scenario},
        {"fig-periodogram", "Fig. 12", "delay-Doppler periodogram, linear vs limited amplifier", "<1 s",
         detail::periodogram_scenario},
        {"fig-cfar-single", "Fig. 13", "SO-CFAR thresholds on single range-cut realizations", "~3 s", detail::cfar_single},
        {"fig-pd-curves", "Figs. 14-15", "probability of detection of the weak target vs SNR", "~10 s", detail::pd_curves},
    };
    return registry;
}

inline const Scenario& find_scenario(const std::string& name)
{
    for (const auto& s : scenario_registry())
        if (s.name == name) return s;
    std::string list;
    for (const auto& s : scenario_registry()) list += "\n  " + s.name + "  (" + s.figure + ")";
    throw ConfigError("unknown scenario '" + name + "'; available scenarios:" + list);
}

/// Run the scenarios' computations without touching the file system.
inline ScenarioOutput compute_scenario(const ExperimentConfig& cfg)
{
    cfg.validate();
    const Scenario& sc = find_scenario(cfg.scenario);
    ScenarioOutput out;
    const ScenarioContext ctx{cfg, SeedStream(cfg.seed, sc.name), ParallelOptions{cfg.workers}};
    try {
        sc.run(ctx, out);
    } catch (const NumericError& e) {
        throw NumericError("scenario " + sc.name + ": " + e.what());
    } catch (const Error& e) {
        throw ConfigError("scenario " + sc.name + ": " + e.what());
    }
    return out;
}

/// Run a scenario and write its CSVs (and plots when requested) plus manifest.json into cfg.out.
inline RunManifest run_scenario(const ExperimentConfig& cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    const ScenarioOutput out = compute_scenario(cfg);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + cfg.out + "': " + ec.message());

    RunManifest m;
    const Scenario& sc = find_scenario(cfg.scenario);
    m.scenario = sc.name;
    m.figure = sc.figure;
    m.config = to_json(cfg);
    m.seed = cfg.seed;
    m.workers = cfg.workers;
    auto emit = [&](const std::string& name, const std::string& data) {
        const std::string path = (fs::path(cfg.out) / name).string();
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ConfigError("cannot write '" + path + "'");
        f << data;
        m.files.push_back({name, sha256_hex(data), data.size()});
    };
    for (const auto& [name, table] : out.tables) emit(name, table.str());
    if (cfg.plots)
        for (const auto& p : out.plots) emit(p.file, render_svg(out.table(p.table), p));
    m.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream mf(fs::path(cfg.out) / "manifest.json", std::ios::binary);
    mf << m.to_json().dump(2) << '\n';
    return m;
}

} // namespace isacaf::experiments
