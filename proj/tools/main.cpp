#include "riskshare/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return riskshare::run_cli(argc, argv, std::cout, std::cerr); }
