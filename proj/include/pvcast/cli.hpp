#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace pvcast::cli {

// Exit codes: 0 success, 1 usage, 2 network/fixture, 3 data, 4 model.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

int run(int argc, const char* const* argv);

}  // namespace pvcast::cli
