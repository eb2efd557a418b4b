#include <iostream>

#include "dynq/cli.hpp"

int main(int argc, char** argv) { return dynq::cli::run(argc, argv, std::cout, std::cerr); }
