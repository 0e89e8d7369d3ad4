#pragma once

#include "skr/cases.hpp"
#include "skr/codec.hpp"
#include "skr/error.hpp"
#include "skr/frontier.hpp"
#include "skr/lattice.hpp"
#include "skr/parallel.hpp"
#include "skr/pmf.hpp"
#include "skr/presets.hpp"
#include "skr/random.hpp"
#include "skr/region.hpp"
#include "skr/rng.hpp"
#include "skr/sim.hpp"
#include "skr/typical.hpp"
