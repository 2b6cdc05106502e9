#include <iostream>

#include "modalnet/cli.hpp"

int main(int argc, char** argv) { return modalnet::run_cli(argc, argv, std::cout, std::cerr); }
