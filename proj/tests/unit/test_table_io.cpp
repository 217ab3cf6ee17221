#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "naive.hpp"
#include "sbm/error.hpp"
#include "sbm/match_oracle.hpp"
#include "sbm/match_stream.hpp"
#include "sbm/table_io.hpp"

using namespace sbm;

TEST_CASE("BMT1 layout") {
  MatchParams p;
  p.block_size = 2;
  p.window_size = 4;
  p.max_matches = 3;
  p.stride = 2;
  MatchTable t(5, 4, p);
  t.set({0, 1}, {{0, 0, 0.0}, {1, -1, 2.25}});
  t.set({0, 0}, {{0, 0, 0.0}});
  std::ostringstream out;
  write_bmt1(out, t);
  CHECK(out.str() ==
        "BMT1 5 4 2 4 3 2\n"
        "R 0 0 1\n"
        "M 0 0 0.000000\n"
        "R 0 1 2\n"
        "M 0 0 0.000000\n"
        "M 1 -1 2.250000\n");
}

TEST_CASE("BMT1 round trip") {
  const ImagePlane img = naive::random_plane(30, 28, 2);
  MatchParams p;
  p.block_size = 4;
  p.window_size = 8;
  p.max_matches = 6;
  p.stride = 3;
  const MatchTable t = find_matches_block(img, p);
  std::stringstream buf;
  write_bmt1(buf, t);
  const MatchTable back = read_bmt1(buf);
  CHECK(back == t);  // k^2 = 16: every distance is exact at 6 decimals
  CHECK(back.params().stride == 3);

  const auto path = std::filesystem::temp_directory_path() / "sbm_table_io.bmt1";
  write_bmt1(path, t);
  CHECK(read_bmt1(path) == t);
}

TEST_CASE("BMT1 rejects malformed input") {
  for (const char* text : {"BMT2 1 1 2 2 1 1\n", "BMT1 4 4 2 2 1\n", "BMT1 4 4 2 2 1 1\nR 0 0 2\nM 0 0 0.0\n",
                           "BMT1 4 4 2 2 1 1\nQ 0 0 1\n", "BMT1 4 4 2 2 1 1\nR 0 0 1\nM 0 0 abc\n"}) {
    std::istringstream in(text);
    CAPTURE(text);
    CHECK_THROWS_WITH_AS(read_bmt1(in), doctest::Contains("corrupt BMT1"), Error);
  }
}

TEST_CASE("SUM1 dump") {
  const SumTable s = compute_sum_table(quantize_8bit(make_ramp_image(10, 8)), {1, 2}, 3);
  std::ostringstream out;
  write_sum1(out, s, 3);
  const std::string bytes = out.str();
  REQUIRE(bytes.size() == 4 + 5 * 4 + s.size() * 4);
  CHECK(bytes.substr(0, 4) == "SUM1");
  std::int32_t hdr[5];
  std::memcpy(hdr, bytes.data() + 4, sizeof hdr);
  CHECK(hdr[0] == static_cast<std::int32_t>(s.cols.size()));
  CHECK(hdr[1] == static_cast<std::int32_t>(s.rows.size()));
  CHECK(hdr[2] == 3);
  CHECK(hdr[3] == 1);
  CHECK(hdr[4] == 2);
  std::uint32_t first;
  std::memcpy(&first, bytes.data() + 24, 4);
  CHECK(first == 36u);
}
