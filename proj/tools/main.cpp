#include <iostream>

#include "maxent_tomo/io.hpp"

int main(int argc, char** argv) { return maxent_tomo::run_cli(argc, argv, std::cout, std::cerr); }
