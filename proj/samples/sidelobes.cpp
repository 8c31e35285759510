// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

// Mean zero-Doppler sidelobe level of CP-OFDM with and without amplifier
// clipping, for 16-PSK and 16-QAM.

#include <cstdio>

#include "isacaf/isacaf.hpp"

using namespace isacaf;

int main()
{
    const std::size_t N = 64, trials = 2000;
    const SeedStream seeds(7, "sample-sidelobes");
    std::printf("%-8s %-10s %12s %12s\n", "symbols", "amplifier", "sidelobe dB", "PSLR dB");
    for (ConstellationSpec cs : {ConstellationSpec{Scheme::PSK, 16}, ConstellationSpec{Scheme::QAM, 16}}) {
        for (const PaConfig& pa : {PaConfig::linear_pa(), PaConfig::sel_ibo_db(1.0), PaConfig::sel_ibo_db(4.0)}) {
            const SignalSource src = symbol_source(cs, BasisKind::OFDM_DFT, N, pa);
            const CutAverage avg = average_zero_doppler_cut(src, trials, AfMode::Periodic, seeds.child(cs.name()));
            const SidelobeMetrics m = sidelobe_metrics(avg, N, AfMode::Periodic);
            char amp[32];
            std::snprintf(amp, sizeof amp, pa.linear ? "linear" : "IBO %.0f dB", pa.ibo_db());
            std::printf("%-8s %-10s %12.2f %12.2f\n", cs.name().c_str(), amp, to_db_clamped(m.mean_sidelobe, -300.0),
                        to_db_clamped(m.pslr, -300.0));
        }
    }
}
