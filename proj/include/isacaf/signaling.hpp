// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Constellations, signaling bases (OFDM / single carrier / Hadamard CDMA)
// and cyclic-prefix framing.

#include <algorithm>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "isacaf/core.hpp"
#include "isacaf/fft.hpp"
#include "isacaf/random.hpp"

namespace isacaf {

enum class Scheme { PSK, QAM };

struct ConstellationSpec {
    Scheme scheme = Scheme::PSK;
    unsigned order = 16;

    std::string name() const { return std::to_string(order) + (scheme == Scheme::PSK ? "-PSK" : "-QAM"); }
    bool operator==(const ConstellationSpec&) const = default;
};

inline unsigned gray_code(unsigned i) { return i ^ (i >> 1); }

/// Unit-average-power, zero-mean constellation with Gray labeling.
///
/// `points()[label]` is the symbol carrying bit label `label`. PSK points sit
/// at e^{j(2 pi i + pi)/M}; square QAM uses odd integer levels scaled by
/// 1/sqrt(2(M-1)/3), e.g. 1/sqrt(10) for 16-QAM.
class Constellation {
public:
    explicit Constellation(ConstellationSpec spec) : spec_(spec)
    {
        const unsigned m = spec.order;
        if (m < 2 || !is_power_of_two(m))
            throw ConstellationError("constellation order must be a power of two >= 2, got " + std::to_string(m));
        points_.resize(m);
        if (spec.scheme == Scheme::PSK) {
            for (unsigned i = 0; i < m; ++i)
                points_[gray_code(i)] = std::polar(1.0, (2.0 * kPi * i + kPi) / m);
            scale_ = 1.0;
        } else {
            const unsigned bits = log2_exact(m);
            if (bits % 2 != 0)
                throw ConstellationError("square QAM needs an even number of bits per symbol, got order " +
                                         std::to_string(m));
            const unsigned side = 1u << (bits / 2);
            scale_ = 1.0 / std::sqrt(2.0 * (m - 1.0) / 3.0);
            for (unsigned i = 0; i < side; ++i) {
                for (unsigned q = 0; q < side; ++q) {
                    const double re = -static_cast<double>(side - 1) + 2.0 * i;
                    const double im = -static_cast<double>(side - 1) + 2.0 * q;
                    const unsigned label = (gray_code(i) << (bits / 2)) | gray_code(q);
                    points_[label] = cplx(re, im) * scale_;
                }
            }
        }
    }

    const ConstellationSpec& spec() const { return spec_; }
    unsigned order() const { return spec_.order; }
    const CVec& points() const { return points_; }
    cplx point(unsigned label) const { return points_.at(label); }
    /// Grid scale applied to the integer QAM lattice (1 for PSK).
    double scale() const { return scale_; }

    cplx draw(Rng& rng) const { return points_[uniform_index_pow2(rng, points_.size())]; }

private:
    ConstellationSpec spec_;
    CVec points_;
    double scale_ = 1.0;
};

/// Parses "16-PSK", "16psk", "QAM64", "64-qam".
inline ConstellationSpec parse_constellation(std::string_view text)
{
    std::string s;
    for (char c : text)
        if (std::isalnum(static_cast<unsigned char>(c))) s.push_back(static_cast<char>(std::tolower(c)));
    ConstellationSpec spec;
    std::string digits;
    for (char c : s)
        if (std::isdigit(static_cast<unsigned char>(c))) digits.push_back(c);
    if (s.find("psk") != std::string::npos)
        spec.scheme = Scheme::PSK;
    else if (s.find("qam") != std::string::npos)
        spec.scheme = Scheme::QAM;
    else
        throw ConstellationError("unknown constellation '" + std::string(text) + "'");
    if (digits.empty() || digits.size() > 6) throw ConstellationError("missing order in '" + std::string(text) + "'");
    spec.order = static_cast<unsigned>(std::stoul(digits));
    Constellation{spec};  // validates
    return spec;
}

using SymbolVector = CVec;

/// i.i.d. uniform draws over the constellation.
inline SymbolVector draw_symbols(const Constellation& c, std::size_t n, Rng& rng)
{
    if (n == 0) throw ConfigError("draw_symbols: count must be >= 1");
    SymbolVector out(n);
    for (auto& s : out) s = c.draw(rng);
    return out;
}

inline SymbolVector draw_symbols(ConstellationSpec spec, std::size_t n, Rng& rng)
{
    return draw_symbols(Constellation(spec), n, rng);
}

enum class BasisKind { OFDM_DFT, SC_IDENTITY, CDMA_HADAMARD };

inline std::string basis_name(BasisKind k)
{
    switch (k) {
    case BasisKind::OFDM_DFT: return "ofdm";
    case BasisKind::SC_IDENTITY: return "sc";
    case BasisKind::CDMA_HADAMARD: return "cdma";
    }
    return "?";
}

inline BasisKind parse_basis(std::string_view s)
{
    std::string t;
    for (char c : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (t == "ofdm" || t == "ofdm_dft") return BasisKind::OFDM_DFT;
    if (t == "sc" || t == "sc_identity" || t == "single-carrier") return BasisKind::SC_IDENTITY;
    if (t == "cdma" || t == "cdma_hadamard" || t == "hadamard") return BasisKind::CDMA_HADAMARD;
    throw ConfigError("unknown signaling basis '" + std::string(s) + "' (expected ofdm, sc or cdma)");
}

struct SignalingBasis {
    BasisKind kind = BasisKind::OFDM_DFT;
    std::size_t size = 64;

    SignalingBasis() = default;
    SignalingBasis(BasisKind k, std::size_t n) : kind(k), size(n)
    {
        if (n == 0) throw ConfigError("basis size must be positive");
        if (k == BasisKind::CDMA_HADAMARD && !is_power_of_two(n))
            throw ConfigError("Hadamard basis needs N a power of two, got " + std::to_string(n));
    }
};

/// Time-domain samples of one symbol, optionally carrying a cyclic prefix.
struct TimeSignal {
    CVec samples;
    std::size_t cp_length = 0;

    std::size_t size() const { return samples.size(); }
    cplx& operator[](std::size_t i) { return samples[i]; }
    const cplx& operator[](std::size_t i) const { return samples[i]; }
};

namespace detail {

// In-place Walsh-Hadamard transform in Sylvester (natural) order, unnormalized.
inline void walsh_hadamard(CVec& v)
{
    const std::size_t n = v.size();
    for (std::size_t h = 1; h < n; h <<= 1) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const cplx a = v[j];
                const cplx b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
}

} // namespace detail

/// Time samples x = U^H x~ for the unitary basis U (OFDM: F_N, SC: I, CDMA: H/sqrt(N)).
inline TimeSignal synthesize(const SignalingBasis& basis, const SymbolVector& symbols)
{
    if (symbols.size() != basis.size)
        throw DimensionError("synthesize: basis size " + std::to_string(basis.size) + " but " +
                             std::to_string(symbols.size()) + " symbols");
    TimeSignal out;
    switch (basis.kind) {
    case BasisKind::OFDM_DFT: out.samples = fft::unitary_idft(symbols); break;
    case BasisKind::SC_IDENTITY: out.samples = symbols; break;
    case BasisKind::CDMA_HADAMARD: {
        out.samples = symbols;
        detail::walsh_hadamard(out.samples);
        const double s = 1.0 / std::sqrt(static_cast<double>(basis.size));
        for (auto& x : out.samples) x *= s;
        break;
    }
    }
    return out;
}

/// Inverse of `synthesize`: x~ = U x.
inline SymbolVector analyze(const SignalingBasis& basis, const TimeSignal& signal)
{
    if (signal.size() != basis.size)
        throw DimensionError("analyze: basis size " + std::to_string(basis.size) + " but signal length " +
                             std::to_string(signal.size()));
    switch (basis.kind) {
    case BasisKind::OFDM_DFT: return fft::unitary_dft(signal.samples);
    case BasisKind::SC_IDENTITY: return signal.samples;
    case BasisKind::CDMA_HADAMARD: {
        CVec v = signal.samples;
        detail::walsh_hadamard(v);
        const double s = 1.0 / std::sqrt(static_cast<double>(basis.size));
        for (auto& x : v) x *= s;
        return v;
    }
    }
    return {};
}

/// Prepends the last L samples.
inline TimeSignal add_cp(const TimeSignal& signal, std::size_t L)
{
    const std::size_t n = signal.size();
    if (L > n) throw ConfigError("add_cp: CP length " + std::to_string(L) + " exceeds symbol length " + std::to_string(n));
    TimeSignal out;
    out.cp_length = L;
    out.samples.reserve(n + L);
    out.samples.insert(out.samples.end(), signal.samples.end() - static_cast<std::ptrdiff_t>(L), signal.samples.end());
    out.samples.insert(out.samples.end(), signal.samples.begin(), signal.samples.end());
    return out;
}

/// Keeps the last N samples of an (N+L)-sample symbol.
inline TimeSignal remove_cp(const TimeSignal& signal, std::size_t L)
{
    if (signal.cp_length != 0 && signal.cp_length != L)
        throw DimensionError("remove_cp: signal carries a CP of " + std::to_string(signal.cp_length) +
                             " samples, asked to remove " + std::to_string(L));
    if (signal.size() <= L)
        throw DimensionError("remove_cp: signal of " + std::to_string(signal.size()) +
                             " samples cannot hold a CP of " + std::to_string(L));
    TimeSignal out;
    out.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(L), signal.samples.end());
    return out;
}

struct FrameConfig {
    std::size_t N = 64;  // subcarriers / samples per symbol
    std::size_t M = 64;  // symbols per frame
    std::size_t L = 16;  // CP length, 0 disables the CP
    double ts = 1.0;     // sampling period

    bool cp_enabled() const { return L > 0; }
    std::size_t symbol_length() const { return N + L; }

    void validate() const
    {
        if (N < 2) throw ConfigError("frame: N must be >= 2");
        if (M < 1) throw ConfigError("frame: M must be >= 1");
        if (L > N) throw ConfigError("frame: CP length L must not exceed N");
        if (!(ts > 0.0)) throw ConfigError("frame: sampling period must be positive");
    }
};

/// M time-domain symbols, each N + L samples long (CP already inserted).
struct Frame {
    FrameConfig config;
    std::vector<TimeSignal> symbols;

    std::size_t serialized_length() const { return config.M * config.symbol_length(); }

    CVec serialize() const
    {
        CVec out;
        out.reserve(serialized_length());
        for (const auto& s : symbols) out.insert(out.end(), s.samples.begin(), s.samples.end());
        return out;
    }

    static Frame deserialize(const CVec& stream, const FrameConfig& cfg)
    {
        if (stream.size() != cfg.M * cfg.symbol_length())
            throw DimensionError("frame: serialized length " + std::to_string(stream.size()) + " != M(N+L) = " +
                                 std::to_string(cfg.M * cfg.symbol_length()));
        Frame f;
        f.config = cfg;
        f.symbols.resize(cfg.M);
        for (std::size_t m = 0; m < cfg.M; ++m) {
            auto first = stream.begin() + static_cast<std::ptrdiff_t>(m * cfg.symbol_length());
            f.symbols[m].samples.assign(first, first + static_cast<std::ptrdiff_t>(cfg.symbol_length()));
            f.symbols[m].cp_length = cfg.L;
        }
        return f;
    }
};

/// Frequency-domain data of a frame together with its CP-framed time signal.
struct TxFrame {
    std::vector<SymbolVector> freq;  // M vectors of N symbols (the division-filter reference)
    Frame time;                      // pre-PA time-domain frame
};

inline TxFrame make_frame(const Constellation& c, BasisKind kind, const FrameConfig& cfg, Rng& rng)
{
    cfg.validate();
    const SignalingBasis basis(kind, cfg.N);
    TxFrame tx;
    tx.freq.resize(cfg.M);
    tx.time.config = cfg;
    tx.time.symbols.resize(cfg.M);
    for (std::size_t m = 0; m < cfg.M; ++m) {
        tx.freq[m] = draw_symbols(c, cfg.N, rng);
        tx.time.symbols[m] = add_cp(synthesize(basis, tx.freq[m]), cfg.L);
    }
    return tx;
}

} // namespace isacaf
