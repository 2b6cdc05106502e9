#pragma once

#include <ostream>

namespace modalnet {

/// Exit status: 0 success or controllable, 1 uncontrollable (check) or no
/// accepted protocol (design-protocol), 2 on any error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace modalnet
