#include <iostream>

#include "kframes/cli.hpp"

int main(int argc, char** argv) { return kframes::cli::run(argc, argv, std::cout, std::cerr); }
