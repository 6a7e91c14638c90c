// SPDX-License-Identifier: Apache-2.0
#include "banachpd/harness.hpp"

int main(int argc, char** argv) { return banachpd::cli_main(argc, argv); }
