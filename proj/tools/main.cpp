#include <iostream>

#include "certipose/cli.hpp"

int main(int argc, char** argv) { return certipose::run_cli(argc, argv, std::cout, std::cerr); }
