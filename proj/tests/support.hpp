#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include <gtest/gtest.h>

#include "hmlab/error.hpp"
#include "hmlab/map_field.hpp"

namespace support {

inline hmlab::MeshPtr sphere_mesh(int level) {
  return std::make_shared<const hmlab::SourceMesh>(
      hmlab::SourceMesh::build(hmlab::MeshSpec::icosphere(level)));
}

inline hmlab::MeshPtr circle_mesh(int n) {
  return std::make_shared<const hmlab::SourceMesh>(
      hmlab::SourceMesh::build(hmlab::MeshSpec::circle(n)));
}

inline hmlab::TargetPtr sphere(int ambient_dim = 3) {
  return std::make_shared<const hmlab::EmbeddedTarget>(
      hmlab::EmbeddedTarget::unit_sphere(ambient_dim));
}

inline hmlab::Vec north() {
  hmlab::Vec p(3);
  p << 0.0, 0.0, 1.0;
  return p;
}

inline void expect_throws_code(const std::function<void()>& fn, hmlab::ErrorCode code) {
  try {
    fn();
    ADD_FAILURE() << "no exception, expected " << hmlab::to_string(code);
  } catch (const hmlab::LabError& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

/// Fresh directory below the build tree, removed first if it exists.
inline std::string scratch_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(HMLAB_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace support
