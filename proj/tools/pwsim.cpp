#include "pwsim/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return pwsim::cli::main(argc, argv, std::cout, std::cerr); }
