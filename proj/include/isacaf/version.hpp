// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

namespace isacaf {

inline constexpr const char* kVersion = "0.1.0";

} // namespace isacaf
