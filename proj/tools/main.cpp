#include <iostream>

#include "freerel/cli.hpp"

int main(int argc, char** argv) { return freerel::run(argc, argv, std::cout, std::cerr); }
