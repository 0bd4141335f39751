//
// MolText - Copyright 2026 The MolText Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "moltext/cli.hpp"

int main(int argc, char **argv) { return moltext::cli_main(argc, argv); }
