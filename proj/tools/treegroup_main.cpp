#include <iostream>
#include <string>
#include <vector>

#include "treegroup/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return treegroup::run_cli(args, std::cout, std::cerr);
}
