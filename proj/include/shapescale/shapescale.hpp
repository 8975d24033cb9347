#pragma once

#include "shapescale/config.hpp"
#include "shapescale/cost_model.hpp"
#include "shapescale/errors.hpp"
#include "shapescale/fit.hpp"
#include "shapescale/io.hpp"
#include "shapescale/law.hpp"
#include "shapescale/oracle.hpp"
#include "shapescale/records.hpp"
#include "shapescale/scaler.hpp"
#include "shapescale/shape.hpp"
#include "shapescale/sweeps.hpp"
