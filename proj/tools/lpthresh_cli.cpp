#include <iostream>

#include "lpthresh/commands.hpp"

int main(int argc, char** argv) { return lpthresh::run_cli(argc, argv, std::cout, std::cerr); }
