#include <iostream>

#include "massera/cli.hpp"

int main(int argc, char** argv) { return massera::run_cli(argc, argv, std::cout, std::cerr); }
