#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kita {

// exit codes: 0 success, 2 config error, 3 data/fit error, 4 numerical failure
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kita
