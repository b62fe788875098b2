// Copyright (C) 2026 letterlm authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "letterlm/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return letterlm::cli::dispatch(args, std::cout, std::cerr);
}
