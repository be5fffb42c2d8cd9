#include <iostream>

#include "kdesat/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return kdesat::cli::run(args, std::cout, std::cerr);
}
