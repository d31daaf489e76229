#include "lgdlab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return lgdlab::cli::dispatch(argc, argv, std::cout, std::cerr); }
