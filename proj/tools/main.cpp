#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return pfv::cli::run(argc, argv, std::cerr, std::cerr); }
