#include <iostream>

#include "mrlsurv/cli.hpp"

int main(int argc, char** argv) { return mrlsurv::run_cli(argc, argv, std::cout, std::cerr); }
