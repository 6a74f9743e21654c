#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

// RAII scratch file under the test working directory.
struct TempFile {
  std::filesystem::path path;

  explicit TempFile(std::string_view contents, std::string_view suffix = ".txt") {
    static int counter = 0;
    path = std::filesystem::path("tmp_" + std::to_string(::getpid()) + "_" +
                                 std::to_string(counter++) +
                                 std::string(suffix));
    std::ofstream out(path, std::ios::binary);
    out << contents;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  std::string str() const { return path.string(); }
};

struct TempDir {
  std::filesystem::path path;

  TempDir() {
    static int counter = 0;
    path = std::filesystem::path("tmpdir_" + std::to_string(::getpid()) + "_" +
                                 std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path.string(); }
};

// True when fn() throws E whose message contains `needle`.
template <class E, class Fn>
bool throws_with(Fn&& fn, std::string_view needle) {
  try {
    fn();
  } catch (const E& e) {
    return std::string_view(e.what()).find(needle) != std::string_view::npos;
  } catch (...) {
    return false;
  }
  return false;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::string s((std::istreambuf_iterator<char>(in)),
                std::istreambuf_iterator<char>());
  return s;
}
