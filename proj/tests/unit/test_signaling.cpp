// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#include <catch_amalgamated.hpp>

#include "isacaf/signaling.hpp"
#include "oracles.hpp"

using namespace isacaf;
using Catch::Approx;

namespace {

double max_abs_diff(const CVec& a, const CVec& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

CVec random_vector(std::size_t n, Rng& rng)
{
    CVec v(n);
    for (auto& x : v) x = complex_gaussian(rng, 1.0);
    return v;
}

} // namespace

TEST_CASE("QPSK draws are Gray-mapped unit-modulus points", "[signaling]")
{
    const Constellation c({Scheme::PSK, 4});
    for (unsigned i = 0; i < 4; ++i) {
        const cplx expected = std::polar(1.0, (2.0 * kPi * i + kPi) / 4.0);
        CHECK(std::abs(c.point(gray_code(i)) - expected) < 1e-15);
    }
    Rng rng(7);
    const cplx s = draw_symbols(c, 1, rng)[0];
    CHECK(std::abs(s) == Approx(1.0).epsilon(1e-15));
    bool found = false;
    for (const auto& p : c.points()) found = found || std::abs(p - s) < 1e-15;
    CHECK(found);
}

TEST_CASE("Adjacent constellation points differ in one label bit", "[signaling]")
{
    for (unsigned order : {4u, 16u, 64u}) {
        const Constellation psk({Scheme::PSK, order});
        for (unsigned i = 0; i < order; ++i) {
            const unsigned a = gray_code(i), b = gray_code((i + 1) % order);
            CHECK(__builtin_popcount(a ^ b) == 1);
            CHECK(std::abs(psk.point(a) - std::polar(1.0, (2.0 * kPi * i + kPi) / order)) < 1e-12);
        }
    }
    const Constellation qam({Scheme::QAM, 16});
    const double d = 2.0 * qam.scale();
    for (unsigned a = 0; a < 16; ++a)
        for (unsigned b = 0; b < 16; ++b)
            if (std::abs(std::abs(qam.point(a) - qam.point(b)) - d) < 1e-12) CHECK(__builtin_popcount(a ^ b) == 1);
}

TEST_CASE("Constellations have zero mean and unit power", "[signaling]")
{
    for (unsigned order : {4u, 16u, 64u, 256u}) {
        for (Scheme s : {Scheme::PSK, Scheme::QAM}) {
            const Constellation c({s, order});
            cplx mean{};
            double power = 0.0;
            for (const auto& p : c.points()) {
                mean += p;
                power += std::norm(p);
            }
            CHECK(std::abs(mean) / order < 1e-14);
            CHECK(power / order == Approx(1.0).epsilon(1e-13));
            if (s == Scheme::PSK)
                for (const auto& p : c.points()) CHECK(std::abs(p) == Approx(1.0));
        }
    }
    CHECK(Constellation({Scheme::QAM, 16}).scale() == Approx(1.0 / std::sqrt(10.0)));
    CHECK(Constellation({Scheme::QAM, 64}).scale() == Approx(1.0 / std::sqrt(42.0)));
}

TEST_CASE("Invalid constellation orders are rejected", "[signaling]")
{
    CHECK_THROWS_AS(Constellation({Scheme::QAM, 8}), ConstellationError);
    CHECK_THROWS_AS(Constellation({Scheme::QAM, 32}), ConstellationError);
    CHECK_THROWS_AS(Constellation({Scheme::PSK, 6}), ConstellationError);
    CHECK_THROWS_AS(Constellation({Scheme::PSK, 1}), ConstellationError);
    CHECK_THROWS_AS(parse_constellation("12-QAM"), ConstellationError);
    CHECK_THROWS_AS(parse_constellation("16-ASK"), ConstellationError);
    CHECK(parse_constellation("16-QAM") == ConstellationSpec{Scheme::QAM, 16});
    CHECK(parse_constellation("psk64") == ConstellationSpec{Scheme::PSK, 64});
}

TEST_CASE("16-QAM draw statistics", "[signaling]")
{
    // Fourth moment of the 16 normalized points, by enumeration.
    const Constellation c({Scheme::QAM, 16});
    double m4 = 0.0;
    for (int i = -3; i <= 3; i += 2)
        for (int q = -3; q <= 3; q += 2) m4 += std::pow((i * i + q * q) / 10.0, 2);
    m4 /= 16.0;
    CHECK(m4 == Approx(1.32));

    Rng rng(2024);
    const auto v = draw_symbols(c, 1000000, rng);
    double p2 = 0.0, p4 = 0.0;
    for (const auto& s : v) {
        p2 += std::norm(s);
        p4 += std::norm(s) * std::norm(s);
    }
    CHECK(p2 / v.size() == Approx(1.0).margin(0.005));
    CHECK(p4 / v.size() == Approx(m4).margin(0.01));
}

TEST_CASE("Draws are reproducible from the seed", "[signaling]")
{
    const SeedStream s(99, "symbols");
    Rng a = s.rng(3), b = s.rng(3), c = s.rng(4);
    const Constellation q({Scheme::QAM, 64});
    CHECK(draw_symbols(q, 32, a) == draw_symbols(q, 32, b));
    Rng a2 = s.rng(3);
    CHECK(draw_symbols(q, 32, a2) != draw_symbols(q, 32, c));
    CHECK_THROWS_AS(draw_symbols(q, 0, a), ConfigError);
}

TEST_CASE("Basis synthesis on the reference vectors", "[signaling]")
{
    const CVec ones(4, cplx(1.0, 0.0));
    const TimeSignal x = synthesize(SignalingBasis(BasisKind::OFDM_DFT, 4), ones);
    CHECK(max_abs_diff(x.samples, CVec{2.0, 0.0, 0.0, 0.0}) < 1e-15);

    Rng rng(1);
    const CVec r = random_vector(8, rng);
    CHECK(synthesize(SignalingBasis(BasisKind::SC_IDENTITY, 8), r).samples == r);

    const TimeSignal h = synthesize(SignalingBasis(BasisKind::CDMA_HADAMARD, 4), CVec{1.0, 0.0, 0.0, 0.0});
    CHECK(max_abs_diff(h.samples, CVec{0.5, 0.5, 0.5, 0.5}) < 1e-15);

    CHECK_THROWS_AS(synthesize(SignalingBasis(BasisKind::OFDM_DFT, 4), CVec(5)), DimensionError);
    CHECK_THROWS_AS(SignalingBasis(BasisKind::CDMA_HADAMARD, 12), ConfigError);
}

TEST_CASE("Bases match explicit matrices and are unitary", "[signaling]")
{
    Rng rng(5);
    for (std::size_t N : {4u, 8u, 16u, 64u}) {
        const CVec sym = random_vector(N, rng);
        const CVec ofdm = synthesize(SignalingBasis(BasisKind::OFDM_DFT, N), sym).samples;
        CHECK(max_abs_diff(ofdm, oracle::dft(sym, true)) < 1e-12);

        CVec had(N);
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) had[i] += oracle::hadamard(i, j, N) * sym[j];
        const CVec cdma = synthesize(SignalingBasis(BasisKind::CDMA_HADAMARD, N), sym).samples;
        CHECK(max_abs_diff(cdma, had) < 1e-12);

        for (BasisKind k : {BasisKind::OFDM_DFT, BasisKind::SC_IDENTITY, BasisKind::CDMA_HADAMARD}) {
            const SignalingBasis b(k, N);
            const TimeSignal t = synthesize(b, sym);
            CHECK(max_abs_diff(analyze(b, t), sym) < 1e-10);
            CHECK(std::abs(energy(t.samples) - energy(sym)) / energy(sym) < 1e-12);
        }
    }
}

TEST_CASE("OFDM time samples are nearly Gaussian", "[signaling]")
{
    const Constellation c({Scheme::PSK, 16});
    const SignalingBasis b(BasisKind::OFDM_DFT, 64);
    Rng rng(11);
    double p2 = 0.0, p4 = 0.0;
    for (int t = 0; t < 4000; ++t) {
        for (const auto& x : synthesize(b, draw_symbols(c, 64, rng)).samples) {
            p2 += std::norm(x);
            p4 += std::norm(x) * std::norm(x);
        }
    }
    const double n = 4000.0 * 64.0;
    const double kurt = (p4 / n) / std::pow(p2 / n, 2);
    CHECK(std::abs(kurt - 2.0) / 2.0 < 0.05);
}

TEST_CASE("Cyclic prefix insertion and removal", "[signaling]")
{
    const TimeSignal x{{1.0, 2.0, 3.0, 4.0}, 0};
    const TimeSignal y = add_cp(x, 2);
    CHECK(y.samples == CVec{3.0, 4.0, 1.0, 2.0, 3.0, 4.0});
    CHECK(y.cp_length == 2);
    CHECK(add_cp(x, 0).samples == x.samples);
    CHECK(remove_cp(y, 2).samples == x.samples);
    CHECK(remove_cp(x, 0).samples == x.samples);
    CHECK_THROWS_AS(add_cp(x, 5), ConfigError);
    CHECK_THROWS_AS(remove_cp(y, 3), DimensionError);
    CHECK_THROWS_AS(remove_cp(TimeSignal{{1.0, 2.0}, 0}, 2), DimensionError);

    Rng rng(3);
    const TimeSignal r{random_vector(16, rng), 0};
    CHECK(remove_cp(add_cp(r, 7), 7).samples == r.samples);
}

TEST_CASE("Frame serialization length", "[signaling]")
{
    Rng rng(8);
    const Constellation c({Scheme::QAM, 16});
    for (std::size_t L : {0u, 4u}) {
        const FrameConfig cfg{16, 5, L, 1.0};
        const TxFrame tx = make_frame(c, BasisKind::OFDM_DFT, cfg, rng);
        const CVec s = tx.time.serialize();
        CHECK(s.size() == (L > 0 ? 5 * (16 + L) : 5 * 16));
        const Frame back = Frame::deserialize(s, cfg);
        for (std::size_t m = 0; m < 5; ++m) CHECK(back.symbols[m].samples == tx.time.symbols[m].samples);
        CHECK_THROWS_AS(Frame::deserialize(CVec(s.size() + 1), cfg), DimensionError);
    }
    CHECK_THROWS_AS((FrameConfig{8, 1, 9, 1.0}.validate()), ConfigError);
}
