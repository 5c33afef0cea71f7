#include <iostream>

#include "penalearn/cli.hpp"

int main(int argc, char** argv) { return penalearn::run_cli(argc, argv, std::cout, std::cerr); }
