#include <iostream>

#include "mrlocal/cli.hpp"

int main(int argc, char** argv) { return mrlocal::run_cli(argc, argv, std::cout, std::cerr); }
