// SPDX-License-Identifier: Apache-2.0
//
// isacaf - ambiguity function and ranging simulation of OFDM ISAC signals
// under power-amplifier clipping.

#pragma once

// Umbrella header for the numerics (no OpenSSL dependency).

#include "isacaf/ambiguity.hpp"
#include "isacaf/analytic.hpp"
#include "isacaf/channel.hpp"
#include "isacaf/core.hpp"
#include "isacaf/detect.hpp"
#include "isacaf/fft.hpp"
#include "isacaf/pa.hpp"
#include "isacaf/parallel.hpp"
#include "isacaf/radar.hpp"
#include "isacaf/random.hpp"
#include "isacaf/signaling.hpp"
#include "isacaf/version.hpp"
