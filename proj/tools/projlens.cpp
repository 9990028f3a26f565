#include "projlens/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return projlens::run_cli(argc, argv, std::cout, std::cerr); }
