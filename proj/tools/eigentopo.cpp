// SPDX-License-Identifier: Apache-2.0

#include "eigentopo/cli.hpp"

int main(int argc, char** argv)
{
  return eigentopo::cli_main(argc, argv);
}
