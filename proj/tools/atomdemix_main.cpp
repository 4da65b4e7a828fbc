// SPDX-License-Identifier: Apache-2.0
#include "atomdemix/cli.hpp"

int main(int argc, char** argv) { return atomdemix::cli_main(argc, argv); }
