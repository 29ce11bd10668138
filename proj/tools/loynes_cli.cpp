#include <iostream>
#include <string>
#include <vector>

#include "loynes/cli.hpp"

int main(int argc, char **argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return loynes::cli::dispatch(std::move(args), std::cout, std::cerr);
}
