#include "pfv/state_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "pfv/spec_json.hpp"

namespace pfv {

namespace {

constexpr char kMagic[4] = {'P', 'F', 'V', 'W'};

template <class T>
void put(std::vector<char>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.insert(out.end(), bytes.begin(), bytes.end());
}

template <class T>
T get(const std::vector<char>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw CorruptFile("state file is truncated");
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  pos += sizeof(T);
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

void save_state(const ComplexVector& psi, const SystemSpec& spec, const std::filesystem::path& path) {
  if (static_cast<std::size_t>(psi.size()) != hilbert_dimension(spec))
    throw DimensionMismatch("state does not match the system dimension");
  std::vector<char> out(kMagic, kMagic + 4);
  put<std::uint32_t>(out, kStateFormatVersion);
  const auto hash = spec_hash(spec);
  out.insert(out.end(), hash.begin(), hash.end());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(psi.size()));
  out.reserve(out.size() + 16 * static_cast<std::size_t>(psi.size()));
  for (const auto& c : psi) {
    put<double>(out, c.real());
    put<double>(out, c.imag());
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("write failed for " + path.string());
}

ComplexVector load_state(const SystemSpec& spec, const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open " + path.string());
  const std::vector<char> in((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  if (in.size() < 4 || std::memcmp(in.data(), kMagic, 4) != 0)
    throw CorruptFile("not a state file (bad magic)");
  std::size_t pos = 4;
  const auto version = get<std::uint32_t>(in, pos);
  if (version != kStateFormatVersion)
    throw CorruptFile("unsupported state file version " + std::to_string(version));
  if (pos + 32 > in.size()) throw CorruptFile("state file is truncated");
  const auto expected = spec_hash(spec);
  if (std::memcmp(in.data() + pos, expected.data(), 32) != 0)
    throw HashMismatch("state file was written for a different system spec");
  pos += 32;
  const auto dim = get<std::uint64_t>(in, pos);
  if (dim != hilbert_dimension(spec)) throw CorruptFile("state dimension does not match the spec");
  if (in.size() - pos != 16 * dim)
    throw CorruptFile(in.size() - pos < 16 * dim ? "state file is truncated"
                                                 : "state file has trailing bytes");
  ComplexVector psi(static_cast<Eigen::Index>(dim));
  for (std::uint64_t i = 0; i < dim; ++i) {
    const double re = get<double>(in, pos);
    const double im = get<double>(in, pos);
    psi[static_cast<Eigen::Index>(i)] = {re, im};
  }
  return psi;
}

}  // namespace pfv
