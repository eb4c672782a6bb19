#include <iostream>

#include "lossbar/cli.hpp"

int main(int argc, char** argv) { return lossbar::cli::run(argc, argv, std::cout, std::cerr); }
