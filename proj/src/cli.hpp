#pragma once

#include <iosfwd>

namespace pzb::cli {

// exit codes: 0 ok, 1 config error, 2 numerical failure, 3 golden mismatch
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace pzb::cli
