#include <iostream>

#include "dbs/cli.hpp"

int main(int argc, char** argv) { return dbs::cli::run(argc, argv, std::cout, std::cerr); }
