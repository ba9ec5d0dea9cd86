#include "statrob/trace_io.hpp"

#include <fstream>
#include <iterator>

#include "statrob/errors.hpp"

namespace statrob {

namespace {

constexpr char kMagic[4] = {'S', 'R', 'T', 'R'};
constexpr std::size_t kHeaderSize = 4 + 4 + 5 * 4 + 4 + 4 + 3 * 8;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class TraceCursor {
 public:
  explicit TraceCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  void need(std::size_t n, const char* what) const {
    if (pos_ + n > bytes_.size())
      throw ParseError(std::string("trace truncated reading ") + what, pos_);
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_trace(const ChainTrace& trace) {
  if (trace.height < 1 || trace.width < 1 || trace.labels < 2 ||
      trace.window < 1)
    throw InvalidInput("encode_trace: trace dimensions not set");
  const std::size_t expected =
      static_cast<std::size_t>(trace.window) * trace.pixel_count();
  if (trace.samples.size() != expected)
    throw ShapeMismatch("encode_trace: sample buffer does not match dimensions");

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + trace.samples.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kTraceFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(trace.height));
  put_u32(out, static_cast<std::uint32_t>(trace.width));
  put_u32(out, static_cast<std::uint32_t>(trace.labels));
  put_u32(out, static_cast<std::uint32_t>(trace.window));
  put_u32(out, trace.meta.iterations);
  out.push_back(static_cast<std::uint8_t>(trace.meta.sampler));
  out.push_back(trace.meta.arm);
  out.push_back(0);
  out.push_back(0);
  put_u32(out, trace.meta.checkpoint_milli);
  put_u64(out, trace.meta.seed);
  put_u64(out, trace.meta.config_hash);
  put_u64(out, trace.meta.degenerate_fallbacks);
  out.insert(out.end(), trace.samples.begin(), trace.samples.end());
  return out;
}

ChainTrace decode_trace(std::span<const std::uint8_t> bytes) {
  TraceCursor cur(bytes);
  cur.need(4, "magic");
  for (int i = 0; i < 4; ++i)
    if (bytes[i] != static_cast<std::uint8_t>(kMagic[i]))
      throw ParseError("not a trace file (bad magic)", 0);
  for (int i = 0; i < 4; ++i) cur.u8("magic");

  const std::uint32_t version = cur.u32("version");
  if (version != kTraceFormatVersion)
    throw Unsupported("trace format version " + std::to_string(version) +
                      " not supported");

  ChainTrace trace;
  trace.height = static_cast<int>(cur.u32("height"));
  trace.width = static_cast<int>(cur.u32("width"));
  trace.labels = static_cast<int>(cur.u32("labels"));
  trace.window = static_cast<int>(cur.u32("window"));
  trace.meta.iterations = cur.u32("iterations");
  const std::uint8_t sampler = cur.u8("sampler kind");
  if (sampler > 1)
    throw ParseError("unknown sampler kind " + std::to_string(sampler),
                     cur.pos() - 1);
  trace.meta.sampler = static_cast<SamplerKind>(sampler);
  trace.meta.arm = cur.u8("arm");
  cur.u8("reserved");
  cur.u8("reserved");
  trace.meta.checkpoint_milli = cur.u32("checkpoint");
  trace.meta.seed = cur.u64("seed");
  trace.meta.config_hash = cur.u64("config hash");
  trace.meta.degenerate_fallbacks = cur.u64("degenerate count");

  if (trace.height < 1 || trace.width < 1 || trace.height > 1 << 16 ||
      trace.width > 1 << 16)
    throw ParseError("trace dimensions out of range", 8);
  if (trace.labels < 2 || trace.labels > 256)
    throw ParseError("trace label count out of range", 16);
  if (trace.window < 1 ||
      static_cast<std::uint32_t>(trace.window) > trace.meta.iterations)
    throw ParseError("trace window out of range", 20);

  const std::size_t expected =
      static_cast<std::size_t>(trace.window) * trace.pixel_count();
  cur.need(expected, "sample payload");
  if (bytes.size() != kHeaderSize + expected)
    throw ParseError("trace has trailing bytes", kHeaderSize + expected);
  trace.samples.assign(bytes.begin() + kHeaderSize, bytes.end());
  for (std::size_t i = 0; i < trace.samples.size(); ++i)
    if (trace.samples[i] >= trace.labels)
      throw ParseError("trace label out of range", kHeaderSize + i);

  trace.end = end_point(trace);
  return trace;
}

void save_trace(const ChainTrace& trace, const std::string& path) {
  const auto bytes = encode_trace(trace);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path);
}

ChainTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_trace(bytes);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail, e.offset);
  }
}

}  // namespace statrob
