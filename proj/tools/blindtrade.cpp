#include <iostream>

#include "blindtrade/cli/app.hpp"

int main(int argc, char** argv) { return blindtrade::cli::run_app(argc, argv, std::cout, std::cerr); }
