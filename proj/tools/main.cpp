#include <iostream>

#include "bioconv/cli.hpp"

int main(int argc, char** argv) { return bioconv::run_cli(argc, argv, std::cout, std::cerr); }
