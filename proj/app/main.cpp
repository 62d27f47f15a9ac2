#include <iostream>
#include <string>
#include <vector>

#include "rootbarrier/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return rootbarrier::run_cli(args, std::cout, std::cerr);
}
