#include <iostream>

#include "fracbirth/cli.hpp"

int main(int argc, char** argv) { return fracbirth::run_cli(argc, argv, std::cout, std::cerr); }
