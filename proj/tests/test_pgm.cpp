#include <doctest.h>

#include <random>

#include "lcr/pgm.hpp"
#include "support.hpp"

using namespace lcr;

TEST_SUITE("pgm") {

TEST_CASE("round trip") {
  std::mt19937_64 rng(1);
  Raster r(7, 5);
  for (auto& p : r.pixels()) p = static_cast<std::uint8_t>(rng());
  const std::string bytes = encode_pgm(r);
  CHECK(bytes.rfind("P5\n7 5\n255\n", 0) == 0);
  CHECK(decode_pgm(bytes) == r);

  testing::TempDir dir("pgm");
  write_pgm(dir.path() / "a.pgm", r);
  CHECK(read_pgm(dir.path() / "a.pgm") == r);
}

TEST_CASE("header comments are accepted") {
  std::string bytes = "P5\n# made by hand\n2 1\n255\n";
  bytes += '\x00';
  bytes += '\xff';
  Raster r = decode_pgm(bytes);
  CHECK(r.width() == 2);
  CHECK(r.at(1, 0) == 255);
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(decode_pgm("P2\n1 1\n255\n0"), ParseError);
  CHECK_THROWS_AS(decode_pgm("P5\n2 2\n255\n\x01"), ParseError);
  CHECK_THROWS_AS(decode_pgm("P5\n2 2\n65535\n"), ParseError);

  testing::TempDir dir("pgm_bad");
  testing::write_file(dir.path() / "t.pgm", "P5\n4 4\n255\nabc");
  try {
    read_pgm(dir.path() / "t.pgm");
    FAIL("expected a data error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("t.pgm") != std::string::npos);
  }
}

}
