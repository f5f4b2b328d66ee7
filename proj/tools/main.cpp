#include <iostream>

#include "coevo/cli.hpp"

int main(int argc, char** argv) { return coevo::cli_main(argc, argv, std::cout, std::cerr); }
