#pragma once

// Umbrella header for the talking-head codec library.

#include "thc/bitstream.hpp"
#include "thc/channel.hpp"
#include "thc/core.hpp"
#include "thc/frame_io.hpp"
#include "thc/harness.hpp"
#include "thc/interpolate.hpp"
#include "thc/metrics.hpp"
#include "thc/motion.hpp"
#include "thc/patch_sr.hpp"
#include "thc/pivot.hpp"
#include "thc/png_io.hpp"
#include "thc/session.hpp"
