#ifndef LCR_TESTS_SUPPORT_HPP_
#define LCR_TESTS_SUPPORT_HPP_

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>
#include <string>

#include "lcr/ccl.hpp"
#include "lcr/raster.hpp"

namespace lcr::testing {

inline Raster random_raster(int w, int h, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution ink(p);
  Raster r(w, h);
  for (auto& px : r.pixels()) px = ink(rng) ? kInk : 0;
  return r;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lcr_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

// Compares two label maps as partitions: a bijection between labels.
inline bool same_partition(const LabelMap& a, const LabelMap& b) {
  if (a.width != b.width || a.height != b.height || a.count != b.count) return false;
  std::vector<std::int64_t> fwd(a.count + 1, -1), back(b.count + 1, -1);
  for (std::size_t i = 0; i < a.labels.size(); ++i) {
    const auto x = a.labels[i], y = b.labels[i];
    if ((x == 0) != (y == 0)) return false;
    if (fwd[x] == -1 && back[y] == -1) {
      fwd[x] = y;
      back[y] = x;
    } else if (fwd[x] != static_cast<std::int64_t>(y) || back[y] != static_cast<std::int64_t>(x)) {
      return false;
    }
  }
  return true;
}

}  // namespace lcr::testing

#endif  // LCR_TESTS_SUPPORT_HPP_
