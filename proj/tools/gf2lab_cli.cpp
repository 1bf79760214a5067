#include <iostream>

#include "cli_commands.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gf2lab::cli::invoke(args, std::cout, std::cerr).code;
}
