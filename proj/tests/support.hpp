#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "icutl/datastore.hpp"
#include "icutl/synthgen.hpp"

namespace testing {

inline std::filesystem::path fixture_dir() { return ICUTL_FIXTURE_DIR "/tiny"; }

// Fresh directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("icutl_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

// Copy of the tiny fixture that a test may corrupt.
inline void copy_fixture(const std::filesystem::path& to) {
  std::filesystem::copy(fixture_dir(), to, std::filesystem::copy_options::recursive |
                                               std::filesystem::copy_options::overwrite_existing);
}

// A small synthetic dataset (with the case-study patient) shared by the
// tests of one process.
inline const icutl::Datastore& small_synthetic() {
  static TempDir dir("small_synth");
  static const icutl::Datastore store = [] {
    icutl::synth::SynthConfig cfg;
    cfg.n_patients = 300;
    cfg.seed = 11;
    cfg.include_case_study = true;
    icutl::synth::generate(cfg, dir.path());
    return icutl::Datastore::ingest(dir.path());
  }();
  return store;
}

}  // namespace testing
