// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The contrast authors

// Writes the two-step inversion trace fixture.
//   make_inversion_fixture <output.json>

#include <iostream>

#include "contrast/trace.hpp"
#include "inversion_fixture.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_inversion_fixture <output.json>\n";
    return 2;
  }
  contrast::save_trace(inversion::build_trace(), argv[1]);
  return 0;
}
