#include "ctmdp/cli.h"

#include <iostream>

int main(int argc, char** argv) { return ctmdp::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
