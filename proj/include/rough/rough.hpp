#pragma once

#include "rough/grid.hpp"
#include "rough/sewing.hpp"
#include "rough/young.hpp"
#include "rough/controlled.hpp"
#include "rough/rde.hpp"
#include "rough/brownian.hpp"
#include "rough/signature.hpp"
#include "rough/io.hpp"
