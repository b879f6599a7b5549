#include <iostream>

#include "ffa/cli/commands.hpp"

int main(int argc, char** argv) { return ffa::cli::run_cli(argc, argv, std::cout, std::cerr); }
