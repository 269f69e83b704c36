#pragma once

#include "numeric.hpp"
#include "graph.hpp"
#include "zoo.hpp"
#include "operators.hpp"
#include "transport.hpp"
#include "hull.hpp"
#include "simplex_limit.hpp"
#include "parallel.hpp"
#include "intrinsic.hpp"
#include "io.hpp"

namespace bratteli {

inline constexpr const char* version = "0.1.0";

}  // namespace bratteli
