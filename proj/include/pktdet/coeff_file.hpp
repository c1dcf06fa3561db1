#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "pktdet/correlator.hpp"

namespace pktdet {

// Textual coefficient dump:
//
//   n=<length>
//   <I word 0>      8 hex digits, one word per line
//   ...
//   <Q word 0>
//   ...
//
// Blank lines and '#' comments are ignored when reading; a leading "0x" is accepted.

class CoeffFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string format_coefficients(const CoefficientBank& bank);
CoefficientBank parse_coefficients(std::string_view text);
CoefficientBank read_coefficient_file(const std::filesystem::path& path);

} // namespace pktdet
