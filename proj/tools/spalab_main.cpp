#include <iostream>

#include "spalab/cli.hpp"

int main(int argc, char** argv) {
    return spalab::run_cli(argc, argv, std::cout, std::cerr);
}
