#include <iostream>

#include "dfskit/cli.hpp"

int main(int argc, char** argv) { return dfskit::run_cli(argc, argv, std::cout, std::cerr); }
