#include "gea/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return gea::run_cli(argc, argv, std::cout, std::cerr); }
