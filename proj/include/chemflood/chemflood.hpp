#pragma once

#include "chemflood/common.hpp"
#include "chemflood/connect.hpp"
#include "chemflood/io.hpp"
#include "chemflood/models.hpp"
#include "chemflood/numerics.hpp"
#include "chemflood/pdesim.hpp"
#include "chemflood/riemann.hpp"
#include "chemflood/scalar.hpp"
#include "chemflood/twave.hpp"
