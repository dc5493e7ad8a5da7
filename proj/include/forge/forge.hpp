#pragma once

// Everything except the HTTP service (forge/service.hpp), which pulls in httplib.
#include "forge/config.hpp"
#include "forge/crease_pattern.hpp"
#include "forge/env.hpp"
#include "forge/error.hpp"
#include "forge/flat_fold.hpp"
#include "forge/fold.hpp"
#include "forge/geometry.hpp"
#include "forge/metrics.hpp"
#include "forge/raster.hpp"
#include "forge/render.hpp"
#include "forge/scorer.hpp"
#include "forge/taskgen.hpp"
