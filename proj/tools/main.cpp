#include <iostream>

#include "biocom/cli.hpp"

int main(int argc, char** argv) { return biocom::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
