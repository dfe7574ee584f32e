#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nakasim {

// "a:step:b" (inclusive) or "a,b,c".
std::vector<double> parse_grid(const std::string& spec);

// Exit codes: 0 all audits pass, 2 an audit failed, 1 usage or config error.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nakasim
