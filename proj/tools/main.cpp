#include "kacov/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return kacov::run_cli(argc, argv, std::cout, std::cerr); }
