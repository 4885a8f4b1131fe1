#include <string>
#include <vector>

#include "coref/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return coref::cli_run(args);
}
