#include "srgeo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return srgeo::cli::run(argc, argv, std::cout, std::cerr); }
