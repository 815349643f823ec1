#pragma once

#include "ncslice/errors.hpp"
#include "ncslice/prng.hpp"
#include "ncslice/gf256.hpp"
#include "ncslice/field_matrix.hpp"
#include "ncslice/rlnc_codec.hpp"
#include "ncslice/channel.hpp"
#include "ncslice/protocols.hpp"
#include "ncslice/analytic.hpp"
#include "ncslice/sim_engine.hpp"
