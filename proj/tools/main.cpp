#include <iostream>

#include "treespn/bench.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return treespn::bench::run_cli(args, std::cout, std::cerr);
}
