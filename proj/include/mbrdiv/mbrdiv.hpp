#pragma once

#include "mbrdiv/analysis.hpp"
#include "mbrdiv/core.hpp"
#include "mbrdiv/decode.hpp"
#include "mbrdiv/decomposition.hpp"
#include "mbrdiv/error.hpp"
#include "mbrdiv/infotheory.hpp"
#include "mbrdiv/io.hpp"
#include "mbrdiv/metrics.hpp"
