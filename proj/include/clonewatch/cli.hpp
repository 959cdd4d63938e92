#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clonewatch::cli {

// Entry point of the `clonewatch` executable. Exit codes: 0 success,
// 1 operational error, 2 when a scan finds a VULNERABLE project.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

} // namespace clonewatch::cli
