#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "statrob/errors.hpp"
#include "statrob/image_io.hpp"
#include "statrob/mrf.hpp"
#include "statrob/trace_io.hpp"

using namespace statrob;
namespace fs = std::filesystem;

namespace {

ChainTrace sample_trace() {
  StereogramSpec spec;
  spec.width = 8;
  spec.height = 6;
  spec.disparity_levels = 4;
  spec.region_shift = 1;
  spec.region_row = 1;
  spec.region_col = 2;
  spec.region_height = 4;
  spec.region_width = 4;
  const Stereogram s = make_random_dot_stereogram(spec);

  StereoMrf model;
  model.left = s.left;
  model.right = s.right;
  model.disparity_levels = 4;

  ChainConfig config;
  config.iterations = 6;
  config.record_window = 3;
  config.seed = 404;

  ChainTrace trace = run_chain(model, config, ApproxConfig{});
  trace.meta.arm = 2;
  trace.meta.checkpoint_milli = 1500;
  trace.meta.config_hash = 0xDEADBEEFCAFEF00DULL;
  return trace;
}

}  // namespace

TEST_CASE("trace encoding round-trips every field") {
  const ChainTrace trace = sample_trace();
  const auto bytes = encode_trace(trace);
  CHECK(bytes.size() == 60 + trace.samples.size());
  CHECK(bytes[0] == 'S');
  CHECK(bytes[1] == 'R');
  CHECK(bytes[2] == 'T');
  CHECK(bytes[3] == 'R');

  const ChainTrace back = decode_trace(bytes);
  CHECK(back.height == trace.height);
  CHECK(back.width == trace.width);
  CHECK(back.labels == trace.labels);
  CHECK(back.window == trace.window);
  CHECK(back.samples == trace.samples);
  CHECK(back.meta.sampler == trace.meta.sampler);
  CHECK(back.meta.arm == trace.meta.arm);
  CHECK(back.meta.checkpoint_milli == trace.meta.checkpoint_milli);
  CHECK(back.meta.seed == trace.meta.seed);
  CHECK(back.meta.config_hash == trace.meta.config_hash);
  CHECK(back.meta.iterations == trace.meta.iterations);
  CHECK(back.meta.degenerate_fallbacks == trace.meta.degenerate_fallbacks);

  // The end point is derived, not stored, and must come back identical.
  CHECK(back.end.labels == trace.end.labels);
  CHECK(back.end.labels == end_point(back).labels);
}

TEST_CASE("trace files survive a disk round trip") {
  const ChainTrace trace = sample_trace();
  const fs::path dir = fs::temp_directory_path() / "statrob_trace_io";
  fs::create_directories(dir);
  const std::string path = (dir / "chain.trace").string();

  save_trace(trace, path);
  const ChainTrace back = load_trace(path);
  CHECK(back.samples == trace.samples);
  CHECK(back.meta.seed == trace.meta.seed);

  CHECK_THROWS_AS(load_trace((dir / "missing.trace").string()), IoError);

  // A corrupt file reports the path and the byte offset.
  auto bytes = encode_trace(trace);
  bytes[0] = 'X';
  std::ofstream out(dir / "broken.trace", std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.close();
  try {
    load_trace((dir / "broken.trace").string());
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("broken.trace") != std::string::npos);
    CHECK(e.offset == 0);
  }
  fs::remove_all(dir);
}

TEST_CASE("trace decoding rejects malformed bytes") {
  const ChainTrace trace = sample_trace();
  const auto good = encode_trace(trace);

  auto bad = good;
  bad[2] = 'X';
  CHECK_THROWS_AS(decode_trace(bad), ParseError);

  bad = good;
  bad[4] = 2;  // unknown format version
  CHECK_THROWS_AS(decode_trace(bad), Unsupported);

  bad = good;
  bad.resize(40);  // header cut short
  CHECK_THROWS_AS(decode_trace(bad), ParseError);

  bad = good;
  bad.resize(good.size() - 5);  // payload cut short
  CHECK_THROWS_AS(decode_trace(bad), ParseError);

  bad = good;
  bad.push_back(0);  // trailing bytes after the payload
  CHECK_THROWS_AS(decode_trace(bad), ParseError);

  bad = good;
  bad[28] = 7;  // sampler kind outside {0, 1}
  CHECK_THROWS_AS(decode_trace(bad), ParseError);

  bad = good;
  bad[16] = 1;  // labels = 1 < 2 (little-endian low byte)
  bad[17] = 0;
  CHECK_THROWS_AS(decode_trace(bad), ParseError);

  bad = good;
  bad[20] = 200;  // window beyond the recorded iteration count
  CHECK_THROWS_AS(decode_trace(bad), ParseError);

  bad = good;
  bad[60] = 9;  // first sample above labels - 1
  try {
    decode_trace(bad);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset == 60);
  }
}
