// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

// One radar frame end to end: clipped CP-OFDM transmit signal, two targets,
// division filter, delay-Doppler periodogram and SO-CFAR on its zero-Doppler cut.

#include <cstdio>

#include "isacaf/isacaf.hpp"

using namespace isacaf;

int main()
{
    const FrameConfig fc{64, 16, 16};
    const PaConfig pa = PaConfig::sel_ibo_db(1.0);
    Rng rng = SeedStream(3, "sample-ranging").rng(0);

    const TxFrame tx = make_frame(Constellation({Scheme::QAM, 16}), BasisKind::OFDM_DFT, fc, rng);
    ChannelConfig ch;
    ch.targets = {{cplx(1.0, 0.0), 4, 0.05}, {cplx(0.3, 0.0), 9, 0.0}};
    ch.noise_variance = transmit_signal_power(pa) / db_to_linear(5.0);
    const Frame rx = apply_channel(sel_amplify(tx.time, pa), ch, rng);

    const Periodogram per = periodogram(division_filter(rx, tx.freq), fc.N, fc.M);
    std::printf("periodogram peaks (delay bin, Doppler bin, dB re max):\n");
    double peak = 0.0;
    for (double v : per.values) peak = std::max(peak, v);
    for (std::size_t l = 0; l < per.N_per; ++l)
        for (long k = per.k_min(); k < per.k_min() + static_cast<long>(per.M_per); ++k)
            if (per.at(l, k) > 0.01 * peak) std::printf("  %2zu %3ld %7.2f\n", l, k, linear_to_db(per.at(l, k) / peak));

    CfarConfig cfar;
    cfar.factor = calibrate_cfar(cfar, exponential_noise(fc.N), 20000, SeedStream(3, "sample-cfar")).factor;
    const DetectionReport r = so_cfar(per.zero_doppler_cut(), cfar);
    std::printf("SO-CFAR (factor %.2f) detections on the zero-Doppler cut:", cfar.factor);
    for (std::size_t b : r.bins) std::printf(" %zu", b);
    std::printf("\n");
}
