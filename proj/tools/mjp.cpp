#include <iostream>

#include "mjp/cli.hpp"

int main(int argc, char** argv) { return mjp::run_cli(argc, argv, std::cout, std::cerr); }
