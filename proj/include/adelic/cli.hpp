#pragma once

#include <iosfwd>
#include <memory>

#include "adelic/newforms.hpp"

namespace adelic {

inline constexpr const char* kToolVersion = "0.1.0";

// whole command line tool; returns the process exit status
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err,
            std::shared_ptr<Transport> transport);

}  // namespace adelic
