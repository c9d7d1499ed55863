#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return spn::cli::run(argc, argv, std::cout, std::cerr); }
