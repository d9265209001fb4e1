#pragma once

#include "jscc/bounds.hpp"
#include "jscc/errors.hpp"
#include "jscc/format.hpp"
#include "jscc/optimizer.hpp"
#include "jscc/profiles.hpp"
#include "jscc/schemes.hpp"
#include "jscc/simulator.hpp"
