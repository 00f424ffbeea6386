#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "xlat/util.hpp"

namespace xlat::testing {

// Unique scratch directory, removed on destruction.
class TempTestDir {
 public:
  TempTestDir() {
    std::random_device rd;
    const std::string name =
        "xlat_test_" + std::to_string(rd()) + "_" + std::to_string(rd());
    path_ = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(path_);
  }
  ~TempTestDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempTestDir(const TempTestDir&) = delete;
  TempTestDir& operator=(const TempTestDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path file(const std::string& name,
                             std::string_view content) const {
    const std::filesystem::path p = path_ / name;
    write_file_atomic(p, content);
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace xlat::testing
