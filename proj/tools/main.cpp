#include <string>
#include <vector>

#include "balance/cli.hpp"

int main(int argc, char** argv) {
    return balance::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
