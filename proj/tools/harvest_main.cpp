#include <iostream>

#include "harvest/scenario.hpp"

int main(int argc, char** argv) { return harvest::cli_dispatch(argc, argv, std::cout, std::cerr); }
