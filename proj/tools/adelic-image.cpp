#include <iostream>

#include "adelic/cli.hpp"

int main(int argc, char** argv) {
    return adelic::run_cli(argc, argv, std::cout, std::cerr, adelic::make_https_transport());
}
