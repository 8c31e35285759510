// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#include <catch_amalgamated.hpp>

#include "isacaf/pa.hpp"
#include "oracles.hpp"

using namespace isacaf;
using Catch::Approx;

TEST_CASE("Backoff coefficient", "[pa]")
{
    CHECK(backoff_coefficient(1.0, 1.0, 1.0) == 1.0);
    CHECK(backoff_coefficient(1.0, std::pow(10.0, 0.4), 1.0) == Approx(0.631).margin(5e-4));
    CHECK_THROWS_AS(backoff_coefficient(1.0, 0.5, 1.0), ConfigError);
    CHECK_THROWS_AS(backoff_coefficient(0.0, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(backoff_coefficient(1.0, -1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(backoff_coefficient(1.0, 1.0, 0.0), ConfigError);
    CHECK_THROWS_AS(PaConfig::sel_ibo_db(-0.5), ConfigError);
}

TEST_CASE("Default limiter sits at its 1 dB compression point", "[pa]")
{
    // Constant envelope at input power P1dB: output 1 dB below the linear gain.
    PaConfig cfg = PaConfig::sel_ibo_db(0.0);
    const cplx y = sel_sample(cplx(std::sqrt(cfg.p1db), 0.0), cfg.G, cfg.v_sat);
    CHECK(linear_to_db(std::norm(y) / cfg.p1db) == Approx(-1.0).margin(1e-12));
    CHECK(PaConfig::sel_ibo_db(1.0).clip_threshold() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Limiter transfer", "[pa]")
{
    PaConfig cfg;
    cfg.v_sat = 2.0;
    cfg.ibo = 1.0;
    cfg.p1db = 1.0;
    const CVec x{{0.3, -0.4}, {1.0, 1.0}, {0.0, 0.0}};
    CHECK(sel_amplify(x, cfg) == x);

    const cplx big = std::polar(6.0, 0.7);
    const cplx out = sel_amplify(CVec{big}, cfg)[0];
    CHECK(std::abs(out) == Approx(2.0));
    CHECK(std::arg(out) == Approx(0.7));

    PaConfig lin = PaConfig::linear_pa(cplx(0.5, 0.5));
    CHECK(sel_amplify(CVec{big}, lin)[0] == cplx(0.5, 0.5) * big);
}

TEST_CASE("Limiter preserves phase and is idempotent", "[pa]")
{
    PaConfig cfg = PaConfig::sel_ibo_db(0.0);  // alpha = 1, G = 1
    REQUIRE(cfg.alpha() == 1.0);
    Rng rng(4);
    CVec x(4096);
    for (auto& v : x) v = complex_gaussian(rng, 1.0);
    const CVec s = sel_amplify(x, cfg);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(std::arg(s[i]) - std::arg(x[i])) < 1e-15);
    CHECK(sel_amplify(s, cfg) == s);
}

TEST_CASE("Linear region gives kappa = G alpha and no distortion", "[pa]")
{
    PaConfig cfg = PaConfig::sel_ibo_db(3.0);
    cfg.v_sat = 10.0;  // Y >= 8
    REQUIRE(cfg.clip_threshold() >= 8.0);
    const auto st = estimate_bussgang(cfg, SignalingBasis(BasisKind::OFDM_DFT, 64), {Scheme::QAM, 16}, 2000,
                                      SeedStream(1, "linear"));
    CHECK(std::abs(st.kappa - cfg.G * cfg.alpha()) < 1e-6);
    CHECK(st.sigma_d2 < 1e-12);
    CHECK(std::isinf(sdr(st, cfg)));
}

TEST_CASE("Gaussian closed form matches quadrature", "[pa]")
{
    CHECK(gaussian_kappa_ratio(1.0) == Approx(0.77152).margin(1e-5));
    for (double Y : {0.3, 0.7, 1.0, 1.5, 2.5}) {
        CHECK(gaussian_kappa_ratio(Y) == Approx(oracle::gaussian_kappa_ratio_quad(Y)).epsilon(1e-9));
        const double k = oracle::gaussian_kappa_ratio_quad(Y);
        CHECK(gaussian_distortion_ratio(Y) == Approx(oracle::gaussian_output_power_quad(Y) - k * k).epsilon(1e-8));
    }
}

TEST_CASE("OFDM Bussgang gain agrees with the Gaussian closed form", "[pa]")
{
    const PaConfig cfg = PaConfig::sel_ibo_db(1.0);  // Y = 1
    const auto st = estimate_bussgang(cfg, SignalingBasis(BasisKind::OFDM_DFT, 1024), {Scheme::PSK, 16}, 3000,
                                      SeedStream(2, "gauss"));
    const double ratio = st.kappa.real() / (std::abs(cfg.G) * cfg.alpha());
    CHECK(std::abs(ratio - oracle::gaussian_kappa_ratio_quad(1.0)) / oracle::gaussian_kappa_ratio_quad(1.0) < 0.005);
    CHECK(std::abs(st.kappa.imag()) < 1e-3);

    // Orthogonality of the decomposition and the variance identity.
    CHECK(st.orthogonality < 0.01);
    const double identity = st.output_power - std::norm(st.kappa) * st.sigma2;
    CHECK(std::abs(st.sigma_d2 - identity) / st.sigma_d2 < 0.01);
    CHECK(std::abs(st.kappa) <= std::abs(cfg.G));
}

TEST_CASE("Kappa and distortion are monotone in the clipping threshold", "[pa]")
{
    double prev_k = 0.0, prev_d = kInf;
    for (double ibo : {0.0, 1.0, 3.0, 6.0, 10.0}) {
        const PaConfig cfg = PaConfig::sel_ibo_db(ibo);
        const auto st = estimate_bussgang(cfg, SignalingBasis(BasisKind::OFDM_DFT, 256), {Scheme::QAM, 16}, 400,
                                          SeedStream(3, "mono"));
        const double k = st.kappa.real() / cfg.alpha();
        const double d = st.sigma_d2 / (cfg.alpha() * cfg.alpha());
        CHECK(k >= prev_k);
        CHECK(d <= prev_d);
        prev_k = k;
        prev_d = d;
    }
}

TEST_CASE("Distortion power versus IBO for PSK and QAM", "[pa]")
{
    double prev_psk = kInf;
    for (double ibo : {0.0, 2.0, 4.0, 6.0, 8.0}) {
        const PaConfig cfg = PaConfig::sel_ibo_db(ibo);
        const SignalingBasis b(BasisKind::OFDM_DFT, 1024);
        const auto psk = estimate_bussgang(cfg, b, {Scheme::PSK, 16}, 300, SeedStream(4, "dp"));
        const auto qam = estimate_bussgang(cfg, b, {Scheme::QAM, 16}, 300, SeedStream(4, "dp"));
        CHECK(psk.sigma_d2 < prev_psk);
        prev_psk = psk.sigma_d2;
        if (ibo == 0.0) CHECK(std::abs(linear_to_db(psk.sigma_d2) - linear_to_db(qam.sigma_d2)) < 0.5);
    }
}

TEST_CASE("SDR expressions", "[pa]")
{
    double prev = 0.0;
    for (double ibo = 0.0; ibo <= 10.0; ibo += 2.0) {
        const PaConfig cfg = PaConfig::sel_ibo_db(ibo);
        const auto st = estimate_bussgang(cfg, SignalingBasis(BasisKind::OFDM_DFT, 1024), {Scheme::QAM, 16}, 200,
                                          SeedStream(5, "sdr"));
        CHECK(sdr(st, cfg) == Approx(sdr_from_p1db(st.sigma_d2, cfg)).epsilon(1e-12));
        CHECK(st.sdr >= prev);
        prev = st.sdr;
    }
    BussgangStats none;
    none.sigma_d2 = 0.0;
    CHECK(std::isinf(sdr(none, PaConfig{})));
}

TEST_CASE("Effective SNR", "[pa]")
{
    CHECK(snr_eff(7.0, kInf) == 7.0);
    CHECK(snr_eff(5.0, 5.0) == Approx(2.5));
    const double s = 20.0;
    CHECK(std::abs(snr_eff(1e6 * s, s) - s) / s < 1e-5);
    for (int i = 0; i < 20; ++i) {
        const double a = std::pow(10.0, -2.0 + 0.3 * i), b = std::pow(10.0, 3.0 - 0.25 * i);
        CHECK(snr_eff(a, b) <= std::min(a, b));
    }
    CHECK_THROWS_AS(snr_eff(1.0, 0.0), ConfigError);
}
