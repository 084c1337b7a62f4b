#include <iostream>

#include "mixmate/cli.hpp"

int main(int argc, char** argv) { return mixmate::run_cli(argc, argv, std::cout, std::cerr); }
