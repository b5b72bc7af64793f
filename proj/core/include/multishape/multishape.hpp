#pragma once

#include "multishape/error.hpp"
#include "multishape/evolution.hpp"
#include "multishape/importance.hpp"
#include "multishape/mask.hpp"
#include "multishape/metrics.hpp"
#include "multishape/netpbm.hpp"
#include "multishape/raster.hpp"
#include "multishape/shape_model.hpp"
#include "multishape/synthgen.hpp"
#include "multishape/trust_region.hpp"
