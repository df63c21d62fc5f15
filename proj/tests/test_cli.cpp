#include <doctest.h>

#include <cstdlib>
#include <map>
#include <sstream>

#include "lcr/cli.hpp"
#include "lcr/alphabet.hpp"
#include "lcr/pgm.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using lcr::testing::TempDir;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result lcr_run(std::vector<std::string> args) {
  args.insert(args.begin(), "lcr");
  std::ostringstream out, err;
  const int code = lcr::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file())
      files[fs::relative(e.path(), dir).string()] = lcr::testing::read_file(e.path());
  return files;
}

double value_after(const std::string& text, const std::string& key) {
  const auto pos = text.rfind(key);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + key.size()));
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit 1 and touch nothing") {
  TempDir dir("cli_usage");
  const std::string out = (dir.path() / "o").string();
  CHECK(lcr_run({}).code == 1);
  CHECK(lcr_run({"frobnicate"}).code == 1);
  CHECK(lcr_run({"--help"}).code == 0);
  const Result r = lcr_run({"--out", out, "train", "--corpus", out, "--level", "1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("--degree") != std::string::npos);
  CHECK(lcr_run({"--out", out, "train", "--corpus", out}).code == 1);
  CHECK(lcr_run({"--out", out, "train", "--corpus", out, "--hierarchy", "--level", "0"}).code == 1);
  CHECK(lcr_run({"--out", out, "eval", "--model", out, "--corpus", out, "--split", "x"}).code == 1);
  CHECK(lcr_run({"--out", out, "gradcheck", "--size", "4"}).code == 1);
  CHECK(lcr_run({"--out", out, "--threads", "0", "gen-alphabet"}).code == 1);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("data errors exit 2") {
  TempDir dir("cli_data");
  const std::string missing = (dir.path() / "missing").string();
  const Result r = lcr_run({"--out", (dir.path() / "o").string(), "train", "--corpus", missing,
                            "--level", "0"});
  CHECK(r.code == 2);
  CHECK(r.err.find("missing") != std::string::npos);
  CHECK(lcr_run({"predict", "--model", missing, missing}).code == 2);
  CHECK(lcr_run({"inspect-cc", missing}).code == 2);
  CHECK(lcr_run({"--precision", "float32", "gradcheck", "--preset", "level0"}).code == 2);
}

TEST_CASE("gen-alphabet honours the output environment variable") {
  TempDir dir("cli_alpha");
  ::setenv(lcr::cli::kOutEnv, dir.path().c_str(), 1);
  const Result r = lcr_run({"gen-alphabet"});
  ::unsetenv(lcr::cli::kOutEnv);
  CHECK(r.code == 0);
  CHECK(lcr::testing::read_file(dir.path() / "default.alphabet") ==
        std::string(lcr::default_alphabet_document()));
}

TEST_CASE("gen-dataset is reproducible byte for byte") {
  TempDir dir("cli_gen");
  const std::string a = (dir.path() / "a").string(), b = (dir.path() / "b").string();
  const std::vector<std::string> args{"gen-dataset", "--styles", "3", "--size", "32"};
  auto with = [&](const std::string& out, const std::string& seed) {
    std::vector<std::string> v{"--seed", seed, "--out", out};
    v.insert(v.end(), args.begin(), args.end());
    return lcr_run(v);
  };
  REQUIRE(with(a, "7").code == 0);
  REQUIRE(with(b, "7").code == 0);
  const auto sa = snapshot(a);
  CHECK(sa.size() > 1000);
  CHECK(sa == snapshot(b));
  const std::string c = (dir.path() / "c").string();
  REQUIRE(with(c, "8").code == 0);
  CHECK(snapshot(c).at("manifest.jsonl") != sa.at("manifest.jsonl"));

  const Result one = lcr_run({"--out", (dir.path() / "d").string(), "gen-dataset", "--styles",
                              "1", "--size", "32"});
  CHECK(one.code == 2);
  CHECK(one.err.find("class 0 of degree 1") != std::string::npos);

  SUBCASE("training diverges with exit 3") {
    const Result d = lcr_run({"--out", (dir.path() / "m").string(), "train", "--corpus", a,
                              "--level", "0", "--epochs", "1", "--lr", "1e300"});
    CHECK(d.code == 3);
    CHECK(d.err.find("level0") != std::string::npos);
  }
  SUBCASE("single-model training writes model and history") {
    const fs::path m = dir.path() / "m";
    const Result t = lcr_run({"--seed", "3", "--out", m.string(), "train", "--corpus", a,
                              "--level", "1", "--degree", "1", "--epochs", "2", "--size",
                              "16"});
    CHECK(t.code == 0);
    CHECK(t.err.find("resampling") != std::string::npos);
    CHECK(fs::exists(m / "degree1.ucnn"));
    const std::string csv = lcr::testing::read_file(m / "degree1_history.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(lcr_run({"--out", m.string(), "train", "--corpus", a, "--level", "1", "--degree", "1",
                   "--preset", "level0"})
              .code == 1);
  }
}

TEST_CASE("inspect-cc") {
  TempDir dir("cli_cc");
  lcr::Raster r(20, 20);
  for (int y = 2; y < 18; ++y)
    for (int x = 2; x < 18; ++x) r.at(x, y) = lcr::kInk;
  r.at(0, 0) = lcr::kInk;
  lcr::write_pgm(dir.path() / "img.pgm", r);
  const Result res = lcr_run({"inspect-cc", (dir.path() / "img.pgm").string()});
  CHECK(res.code == 0);
  CHECK(res.out.find("components 2\n") != std::string::npos);
  CHECK(res.out.find("components after strip 1\n") != std::string::npos);
  CHECK(res.out.find("single component yes") != std::string::npos);
}

TEST_CASE("gradcheck command") {
  const Result ok = lcr_run({"gradcheck", "--preset", "level0", "--size", "8"});
  CHECK(ok.code == 0);
  CHECK(value_after(ok.out, "max_rel_error ") < 1e-4);
  const Result strict =
      lcr_run({"gradcheck", "--preset", "level0", "--size", "8", "--tolerance", "1e-30"});
  CHECK(strict.code == 2);
  CHECK(lcr_run({"gradcheck", "--preset", "level7"}).code == 1);
}

}
