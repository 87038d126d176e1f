#include "riskmdp/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return riskmdp::run_cli(argc, argv, std::cout, std::cerr); }
