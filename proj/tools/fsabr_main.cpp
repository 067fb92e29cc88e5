#include <iostream>

#include "fsabr/cli.hpp"

int main(int argc, char** argv) { return fsabr::cli::run(argc, argv, std::cout, std::cerr); }
