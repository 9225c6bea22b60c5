#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stagetv {

/// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

} // namespace stagetv
