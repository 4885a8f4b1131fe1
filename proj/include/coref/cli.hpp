#pragma once
#include <string>
#include <vector>

namespace coref {

// Full command-line entry point; args exclude the program name.
// Exit codes: 0 success, 1 usage, 2 data/validation, 3 numerical abort.
int cli_run(const std::vector<std::string>& args);

} // namespace coref
