#include <iostream>

#include "holo/cli/cli.hpp"

int main(int argc, char** argv) { return holo::cli::run(argc, argv, std::cout, std::cerr); }
