#pragma once
#include "errors.hpp"
#include "special.hpp"
#include "sixvertex.hpp"
#include "dimers.hpp"
#include "tension.hpp"
#include "shapes.hpp"
#include "flow.hpp"
