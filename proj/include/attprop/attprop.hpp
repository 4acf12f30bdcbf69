#pragma once

#include "attprop/errors.hpp"
#include "attprop/so3.hpp"
#include "attprop/pendulum.hpp"
#include "attprop/lgvi.hpp"
#include "attprop/random.hpp"
#include "attprop/mvee.hpp"
#include "attprop/ellipsoid.hpp"
#include "attprop/propagation.hpp"
