#include <iostream>

#include "epl/cli.hpp"

int main(int argc, char** argv) { return epl::cli::run(argc, argv, std::cout, std::cerr); }
