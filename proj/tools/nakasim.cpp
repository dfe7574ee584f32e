#include <iostream>

#include "nakasim/cli.hpp"

int main(int argc, char** argv) { return nakasim::cli_main(argc, argv, std::cout, std::cerr); }
