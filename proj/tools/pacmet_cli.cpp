#include <iostream>

#include "pacmet/cli.hpp"

int main(int argc, char** argv) { return pacmet::run_cli(argc, argv, std::cout, std::cerr); }
