#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <doctest.h>

#include "oracles.hpp"
#include "pfv/state_io.hpp"

using namespace pfv;
using namespace pfv::testing;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() : path(std::filesystem::temp_directory_path() / "pfv_state_io_test") {
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void dump(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("state files round trip bit for bit") {
  TempDir dir;
  const SystemSpec s = coupled_oscillator(21, 4.0, 0.1, 3);
  const ComplexVector psi = random_state(84, 7, true);
  save_state(psi, s, dir.path / "a.bin");
  const ComplexVector back = load_state(s, dir.path / "a.bin");
  REQUIRE(back.size() == psi.size());
  CHECK(std::memcmp(back.data(), psi.data(), sizeof(Complex) * psi.size()) == 0);

  const auto bytes = slurp(dir.path / "a.bin");
  CHECK(bytes.size() == 4 + 4 + 32 + 8 + 16 * 84);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "PFVW");

  save_state(back, s, dir.path / "b.bin");
  CHECK(slurp(dir.path / "b.bin") == bytes);
}

TEST_CASE("state files are tied to their spec") {
  TempDir dir;
  const SystemSpec s = coupled_oscillator(21, 4.0, 0.1, 3);
  save_state(random_state(84, 1, true), s, dir.path / "a.bin");
  const SystemSpec other = coupled_oscillator(21, 4.0, 0.2, 3);
  CHECK_THROWS_AS(load_state(other, dir.path / "a.bin"), HashMismatch);
  CHECK_THROWS_AS(save_state(random_state(10, 1, true), s, dir.path / "c.bin"), DimensionMismatch);
}

TEST_CASE("structural damage is reported") {
  TempDir dir;
  const SystemSpec s = coupled_oscillator(21, 4.0, 0.1, 3);
  save_state(random_state(84, 2, true), s, dir.path / "a.bin");
  const auto good = slurp(dir.path / "a.bin");
  const auto p = dir.path / "bad.bin";

  auto truncated = good;
  truncated.resize(good.size() - 5);
  dump(p, truncated);
  CHECK_THROWS_AS(load_state(s, p), CorruptFile);

  auto trailing = good;
  trailing.push_back('\0');
  dump(p, trailing);
  CHECK_THROWS_AS(load_state(s, p), CorruptFile);

  auto magic = good;
  magic[0] = 'X';
  dump(p, magic);
  CHECK_THROWS_AS(load_state(s, p), CorruptFile);

  auto version = good;
  version[4] = 9;
  dump(p, version);
  CHECK_THROWS_AS(load_state(s, p), CorruptFile);

  dump(p, {});
  CHECK_THROWS_AS(load_state(s, p), CorruptFile);
  CHECK_THROWS(load_state(s, dir.path / "missing.bin"));
}
