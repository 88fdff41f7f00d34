#include <iostream>

#include "ubb/cli.hpp"

int main(int argc, char** argv) { return ubb::cli::run(argc, argv, std::cout, std::cerr); }
