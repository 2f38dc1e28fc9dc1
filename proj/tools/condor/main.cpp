#include <iostream>
#include <string>
#include <vector>

#include "condor/cli.hpp"

int main(int argc, char** argv) {
    return condor::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
