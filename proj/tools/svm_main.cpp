#include <iostream>

#include "svm/cli.hpp"

int main(int argc, char** argv) { return svm::cli_main(argc, argv, std::cout, std::cerr); }
