#include "nnfl/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return nnfl::run_cli(argc, argv, std::cout, std::cerr); }
