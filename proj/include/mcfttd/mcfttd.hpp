#pragma once

#include "mcfttd/error.hpp"
#include "mcfttd/fbg_device.hpp"
#include "mcfttd/hetero_design.hpp"
#include "mcfttd/mwp_filter.hpp"
#include "mcfttd/units.hpp"
#include "mcfttd/version.hpp"
#include "mcfttd/waveguide.hpp"
