#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#ifndef FACTLINE_REPO_DIR
#define FACTLINE_REPO_DIR "."
#endif

namespace test {

inline std::filesystem::path repo_dir() { return FACTLINE_REPO_DIR; }
inline std::filesystem::path asset_dir() { return repo_dir() / "assets"; }
inline std::filesystem::path fixture_dir() { return asset_dir() / "fixtures"; }

// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("factline_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  out << body;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}

}  // namespace test
