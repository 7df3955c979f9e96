#pragma once

#include "pfrd/version.hpp"
#include "pfrd/error.hpp"
#include "pfrd/grid.hpp"
#include "pfrd/kernel.hpp"
#include "pfrd/reaction.hpp"
#include "pfrd/splitting.hpp"
#include "pfrd/peregrine.hpp"
#include "pfrd/config.hpp"
#include "pfrd/presets.hpp"
#include "pfrd/snapshot.hpp"
