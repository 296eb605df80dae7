#ifndef TRAPFIELD_TRAPFIELD_HPP
#define TRAPFIELD_TRAPFIELD_HPP

#include "constants.hpp"
#include "errors.hpp"
#include "specfun.hpp"
#include "crystal.hpp"
#include "modes.hpp"
#include "propagator.hpp"
#include "couplings.hpp"
#include "renorm.hpp"
#include "drive.hpp"
#include "dynamics.hpp"

#define TRAPFIELD_VERSION "0.1.0"

#endif
