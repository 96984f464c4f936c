#pragma once

#include <string>

#include "xysim/xeb.hpp"

namespace xysim {

// Sample-set text format: header line, then "bitstring count" rows in
// ascending bitstring order. Bit 0 = site 0 is the least-significant
// (rightmost) character.
std::string sample_set_to_text(const SampleSet& s);
SampleSet sample_set_from_text(const std::string& text);

void write_text_file_atomic(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string bits_to_string(uint64_t bits, int n_q);
uint64_t string_to_bits(const std::string& s);

}  // namespace xysim
