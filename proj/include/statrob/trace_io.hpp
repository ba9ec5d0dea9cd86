#ifndef STATROB_TRACE_IO_HPP
#define STATROB_TRACE_IO_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "statrob/mrf.hpp"

namespace statrob {

// Binary chain trace, little-endian:
//   "SRTR" | u32 version | u32 height width labels window iterations
//   | u8 sampler u8 arm u16 reserved | u32 checkpoint_milli
//   | u64 seed config_hash degenerate_fallbacks
//   | window*height*width label bytes (one plane per recorded sweep)
inline constexpr std::uint32_t kTraceFormatVersion = 1;

std::vector<std::uint8_t> encode_trace(const ChainTrace& trace);
ChainTrace decode_trace(std::span<const std::uint8_t> bytes);

void save_trace(const ChainTrace& trace, const std::string& path);
ChainTrace load_trace(const std::string& path);

}  // namespace statrob

#endif
