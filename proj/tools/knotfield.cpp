#include <iostream>
#include <string>
#include <vector>

#include "knotfield/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return knotfield::run_cli(args, std::cout, std::cerr);
}
