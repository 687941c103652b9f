#pragma once

#include "conexp/random.hpp"

namespace conexp::testing {
using namespace conexp::gen;
}  // namespace conexp::testing
