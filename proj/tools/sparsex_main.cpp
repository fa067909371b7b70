#include <iostream>

#include "sparsex/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return sparsex::run_cli(args, std::cout, std::cerr);
}
