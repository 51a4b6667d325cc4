#include <iostream>

#include "brainstorm/cli.hpp"

int main(int argc, char** argv) {
    return brainstorm::cli::run_cli(argc, argv, std::cout, std::cerr);
}
