#pragma once

#include "hetnet/basin.hpp"
#include "hetnet/error.hpp"
#include "hetnet/geometry.hpp"
#include "hetnet/integrator.hpp"
#include "hetnet/itinerary.hpp"
#include "hetnet/linearize.hpp"
#include "hetnet/network.hpp"
#include "hetnet/return_map.hpp"
#include "hetnet/sequence.hpp"
#include "hetnet/vector_field.hpp"
