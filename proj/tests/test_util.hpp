#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "actrec/types.hpp"

namespace actrec::testing {

/// Scratch directory removed at scope exit.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("actrec_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline SkeletonFrame make_frame(std::initializer_list<Eigen::Vector3d> points) {
  SkeletonFrame f;
  for (const auto& p : points) {
    Joint j;
    j.position = p;
    j.confidence = 1.0;
    f.joints.push_back(j);
  }
  return f;
}

}  // namespace actrec::testing
