#include "swlrtr/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return swlrtr::run_cli(argc, argv, std::cout, std::cerr); }
