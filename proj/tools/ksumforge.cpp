#include <iostream>

#include "ksumforge/cli.hpp"

int main(int argc, char** argv) { return ksumforge::cli_main(argc, argv, std::cout, std::cerr); }
