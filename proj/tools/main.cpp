#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ranhpp::cli::run(argc, argv, std::cout, std::cerr); }
