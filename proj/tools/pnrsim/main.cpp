#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return pnrcli::run(argc, argv, std::cout, std::cerr); }
