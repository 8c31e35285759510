// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

// Command-line front end: scenario runner plus a few one-off computations.
// Exit codes: 0 success, 2 configuration error, 3 numeric error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "isacaf/experiments/scenarios.hpp"
#include "isacaf/isacaf.hpp"

namespace {

using namespace isacaf;
using namespace isacaf::experiments;

// Flags shared by the one-off subcommands; applied on top of an optional config file.
struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<unsigned> workers;
    std::optional<std::string> constellation;
    std::optional<double> ibo_db;
    std::optional<std::size_t> N;
    bool linear = false;

    void add_to(CLI::App* app, bool with_signal)
    {
        app->add_option("--config", config, "JSON configuration file")->check(CLI::ExistingFile);
        app->add_option("--seed", seed, "base seed");
        app->add_option("--trials", trials, "Monte-Carlo trials");
        app->add_option("--workers", workers, "worker threads");
        if (!with_signal) return;
        app->add_option("--constellation", constellation, "e.g. 16-PSK, 16-QAM, 64-QAM");
        app->add_option("--ibo-db", ibo_db, "input back-off in dB");
        app->add_option("-N,--subcarriers", N, "subcarriers per symbol");
        app->add_flag("--linear", linear, "bypass the limiter");
    }

    ExperimentConfig make() const
    {
        ExperimentConfig c = config.empty() ? ExperimentConfig{} : load_config(config);
        if (seed) c.seed = *seed;
        if (trials) c.trials = *trials;
        if (workers) c.workers = *workers;
        if (constellation) c.constellations = {parse_constellation(*constellation)};
        if (ibo_db) c.pa.ibo_db = *ibo_db;
        if (N) c.N = *N;
        c.validate();
        return c;
    }

    ConstellationSpec constellation_of(const ExperimentConfig& c) const
    {
        return c.constellations_or({{Scheme::PSK, 16}}).front();
    }
};

void emit(const CsvTable& t, const std::string& out)
{
    if (out.empty() || out == "-") {
        std::cout << t.str();
        return;
    }
    t.write(out);
    std::cerr << "wrote " << out << '\n';
}

int run_main(int argc, char** argv)
{
    CLI::App app{"isacaf: ambiguity functions and ranging of OFDM ISAC signals under PA clipping"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    // list
    auto* list = app.add_subcommand("list", "list the available scenarios");
    bool list_json = false;
    list->add_flag("--json", list_json, "machine-readable output");
    list->callback([&] {
        if (list_json) {
            json arr = json::array();
            for (const auto& s : scenario_registry())
                arr.push_back({{"name", s.name}, {"figure", s.figure}, {"description", s.description}, {"runtime", s.runtime}});
            std::cout << arr.dump(2) << '\n';
            return;
        }
        for (const auto& s : scenario_registry()) {
            char line[256];
            std::snprintf(line, sizeof line, "%-24s %-16s %-6s %s", s.name.c_str(), s.figure.c_str(), s.runtime.c_str(),
                          s.description.c_str());
            std::cout << line << '\n';
        }
    });

    // run
    auto* run = app.add_subcommand("run", "run a named scenario and write CSVs plus manifest.json");
    std::string scenario, run_config, run_out;
    std::optional<std::uint64_t> run_seed;
    std::optional<std::size_t> run_trials;
    std::optional<unsigned> run_workers;
    bool run_plots = false;
    run->add_option("scenario", scenario, "scenario name (see `isacaf list`)")->required();
    run->add_option("--config", run_config, "JSON configuration file")->check(CLI::ExistingFile);
    run->add_option("--seed", run_seed, "base seed");
    run->add_option("--trials", run_trials, "Monte-Carlo trials (0: scenario default)");
    run->add_option("--out", run_out, "output directory");
    run->add_option("--workers", run_workers, "worker threads");
    run->add_flag("--plots", run_plots, "also write SVG plots");
    run->callback([&] {
        ExperimentConfig c = run_config.empty() ? ExperimentConfig{} : load_config(run_config);
        c.scenario = scenario;
        if (run_seed) c.seed = *run_seed;
        if (run_trials) c.trials = *run_trials;
        if (!run_out.empty()) c.out = run_out;
        if (run_workers) c.workers = *run_workers;
        if (run_plots) c.plots = true;
        const RunManifest m = run_scenario(c);
        std::cerr << m.scenario << " (" << m.figure << "): " << m.files.size() << " files in " << c.out << ", "
                  << format_number(m.wall_clock_s) << " s\n";
        for (const auto& f : m.files) std::cout << f.sha256 << "  " << f.name << '\n';
    });

    // calibrate-cfar
    auto* cal = app.add_subcommand("calibrate-cfar", "calibrate the SO-CFAR threshold factor on exponential noise");
    CommonFlags cal_flags;
    cal_flags.add_to(cal, false);
    std::optional<std::size_t> cal_window, cal_guard, cal_cells;
    std::optional<double> cal_pfa;
    cal->add_option("--window", cal_window, "training cells per side");
    cal->add_option("--guard", cal_guard, "guard cells per side");
    cal->add_option("--pfa", cal_pfa, "target false-alarm probability");
    cal->add_option("--cells", cal_cells, "cells per range cut (default N x zero padding)");
    cal->callback([&] {
        ExperimentConfig c = cal_flags.make();
        if (cal_window) c.cfar.window = *cal_window;
        if (cal_guard) c.cfar.guard = *cal_guard;
        if (cal_pfa) c.cfar.pfa = *cal_pfa;
        c.validate();
        const std::size_t cells = cal_cells.value_or(c.N * c.zero_padding);
        const CalibrationResult r = calibrate_cfar(c.cfar, exponential_noise(cells), c.trials_or(c.calibration_trials),
                                                   SeedStream(c.seed, "calibrate-cfar"), ParallelOptions{c.workers});
        CsvTable t({"window", "guard", "pfa", "factor", "achieved_pfa", "cell_tests"});
        t.add_row({static_cast<double>(c.cfar.window), static_cast<double>(c.cfar.guard), c.cfar.pfa, r.factor, r.achieved_pfa,
                   static_cast<double>(r.cell_tests)});
        std::cout << t.str();
    });

    // af-cut
    auto* af = app.add_subcommand("af-cut", "averaged zero-Doppler or zero-delay cut of one configuration");
    CommonFlags af_flags;
    af_flags.add_to(af, true);
    std::string af_cut = "delay", af_mode = "periodic", af_basis = "ofdm", af_out;
    std::optional<std::size_t> af_K;
    af->add_option("--cut", af_cut, "delay (zero-Doppler) or doppler (zero-delay)")->check(CLI::IsMember({"delay", "doppler"}));
    af->add_option("--mode", af_mode, "periodic or aperiodic")->check(CLI::IsMember({"periodic", "aperiodic"}));
    af->add_option("--basis", af_basis, "ofdm, sc or cdma");
    af->add_option("-K,--doppler-bins", af_K, "Doppler bins for the zero-delay cut (default N)");
    af->add_option("--out", af_out, "CSV file (default stdout)");
    af->callback([&] {
        const ExperimentConfig c = af_flags.make();
        const PaConfig pa = af_flags.linear ? c.pa.linear() : c.pa.nonlinear();
        const SignalSource src = symbol_source(af_flags.constellation_of(c), parse_basis(af_basis), c.N, pa);
        const SeedStream seeds(c.seed, "af-cut");
        const std::size_t trials = c.trials_or(1000);
        CsvTable t({af_cut == "delay" ? "lag" : "doppler_bin", "mean", "sem", "db"});
        if (af_cut == "delay") {
            const AfMode mode = af_mode == "periodic" ? AfMode::Periodic : AfMode::Aperiodic;
            const CutAverage a = average_zero_doppler_cut(src, trials, mode, seeds, ParallelOptions{c.workers});
            const auto lags = delay_axis(c.N, mode);
            const double ref = a.mean[mode == AfMode::Periodic ? 0 : c.N - 1];
            for (std::size_t i = 0; i < lags.size(); ++i)
                t.add_row({static_cast<double>(lags[i]), a.mean[i], a.sem[i], to_db_clamped(a.mean[i] / ref)});
        } else {
            const std::size_t K = af_K.value_or(c.N);
            const CutAverage a = average_zero_delay_cut(src, trials, K, seeds, ParallelOptions{c.workers});
            for (std::size_t i = 0; i < K; ++i)
                t.add_row({static_cast<double>(i), a.mean[i], a.sem[i], to_db_clamped(a.mean[i] / a.mean[0])});
        }
        emit(t, af_out);
    });

    // pd-curve
    auto* pd = app.add_subcommand("pd-curve", "probability of detection of the weak target vs SNR");
    CommonFlags pd_flags;
    pd_flags.add_to(pd, true);
    bool pd_dl = false;
    double snr_min = 0, snr_max = 20, snr_step = 1;
    std::string pd_out;
    pd->add_flag("--distortion-limited", pd_dl, "noise-free channel");
    pd->add_option("--snr-min", snr_min, "first SNR point [dB]");
    pd->add_option("--snr-max", snr_max, "last SNR point [dB]");
    pd->add_option("--snr-step", snr_step, "SNR step [dB]")->check(CLI::PositiveNumber);
    pd->add_option("--out", pd_out, "CSV file (default stdout)");
    pd->callback([&] {
        const ExperimentConfig c = pd_flags.make();
        RVec grid = c.snr_db;
        if (grid.empty())
            for (double s = snr_min; s <= snr_max + 1e-9; s += snr_step) grid.push_back(s);
        const PdScenario sc = pd_scenario(c, pd_flags.constellation_of(c), pd_flags.linear, pd_dl);
        const PdCurve curve = pd_experiment(sc, grid, c.trials_or(1000), SeedStream(c.seed, "pd-curve"), ParallelOptions{c.workers});
        std::cerr << curve.label << ", CFAR factor " << format_number(curve.factor) << '\n';
        emit(isacaf::experiments::detail::pd_table(curve), pd_out);
    });

    // periodogram
    auto* per = app.add_subcommand("periodogram", "delay-Doppler periodogram of one frame");
    CommonFlags per_flags;
    per_flags.add_to(per, true);
    std::optional<double> per_snr;
    std::optional<std::size_t> per_M, per_zp;
    std::string per_out;
    per->add_option("--snr-db", per_snr, "SNR [dB]");
    per->add_option("-M,--symbols", per_M, "OFDM symbols per frame");
    per->add_option("--zero-padding", per_zp, "zero-padding factor of both periodogram axes");
    per->add_option("--out", per_out, "CSV file (default stdout)");
    per->callback([&] {
        ExperimentConfig c = per_flags.make();
        if (per_snr) c.snr_point_db = *per_snr;
        if (per_M) c.M = *per_M;
        if (per_zp) c.zero_padding = *per_zp;
        c.validate();
        const PaConfig pa = per_flags.linear ? c.pa.linear() : c.pa.nonlinear();
        const FrameConfig fc{c.N, c.M, c.L};
        Rng rng = SeedStream(c.seed, "periodogram").rng(0);
        const TxFrame tx = make_frame(Constellation(per_flags.constellation_of(c)), BasisKind::OFDM_DFT, fc, rng);
        const ChannelConfig ch{c.targets, transmit_signal_power(pa) / db_to_linear(c.snr_point_db), false};
        const Frame rx = apply_channel(sel_amplify(tx.time, pa), ch, rng);
        const Periodogram p = periodogram(division_filter(rx, tx.freq), c.zero_padding * c.N, c.zero_padding * c.M);
        CsvTable t({"delay_bin", "doppler_bin", "value"});
        for (std::size_t l = 0; l < p.N_per; ++l)
            for (long k = p.k_min(); k < p.k_min() + static_cast<long>(p.M_per); ++k)
                t.add_row({static_cast<double>(l), static_cast<double>(k), p.at(l, k)});
        emit(t, per_out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run_main(argc, argv);
    } catch (const isacaf::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const isacaf::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
