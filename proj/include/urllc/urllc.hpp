// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "urllc/core/csv.hpp"
#include "urllc/core/error.hpp"
#include "urllc/core/geometry.hpp"
#include "urllc/core/parallel.hpp"
#include "urllc/core/random.hpp"
#include "urllc/core/special.hpp"
#include "urllc/core/stats.hpp"
#include "urllc/fading/covariance.hpp"
#include "urllc/fading/energy_cdf.hpp"
#include "urllc/fading/environment.hpp"
#include "urllc/fading/packet_variation.hpp"
#include "urllc/fading/spectrum.hpp"
#include "urllc/fading/trajectory.hpp"
#include "urllc/oracle/cycle.hpp"
#include "urllc/oracle/estimate.hpp"
#include "urllc/oracle/sweep.hpp"
#include "urllc/predict/gp.hpp"
#include "urllc/predict/misprediction.hpp"
#include "urllc/protocol/config.hpp"
#include "urllc/protocol/outage.hpp"
#include "urllc/protocol/search.hpp"
#include "urllc/spatial/spatial.hpp"
