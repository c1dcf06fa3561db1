#pragma once

#include <string>

namespace pktdet {

// 128-bit accumulators. Sums of squared 32-bit samples over long windows do
// not fit in 64 bits.
__extension__ typedef __int128 WideInt;
__extension__ typedef unsigned __int128 WideUInt;

std::string to_string(WideInt v);
std::string to_string(WideUInt v);

} // namespace pktdet
