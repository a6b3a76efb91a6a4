#pragma once

#include "ltcsync/analysis.hpp"
#include "ltcsync/audio.hpp"
#include "ltcsync/bmc.hpp"
#include "ltcsync/crosscorr.hpp"
#include "ltcsync/csv.hpp"
#include "ltcsync/error.hpp"
#include "ltcsync/events.hpp"
#include "ltcsync/ltc_frame.hpp"
#include "ltcsync/ltc_stream.hpp"
#include "ltcsync/sim/clock.hpp"
#include "ltcsync/sim/config.hpp"
#include "ltcsync/sim/latency.hpp"
#include "ltcsync/sim/simulation.hpp"
#include "ltcsync/timebase.hpp"
#include "ltcsync/wav.hpp"
