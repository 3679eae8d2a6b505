#include "cmarl/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "cmarl/core/errors.hpp"

namespace cmarl::nn {

namespace {

constexpr char kMagic[8] = {'C', 'M', 'A', 'R', 'L', 'N', 'N', '\0'};

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xff));
}

void put_string(std::string& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) raise(ErrorCode::Io, "truncated checkpoint");
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& c) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, Checkpoint::kVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.specs.size()));
  for (const NamedSpec& s : c.specs) {
    put_string(out, s.name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.spec.input_dim));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.spec.hidden_dim));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.spec.output_dim));
    put<std::uint8_t>(out, static_cast<std::uint8_t>(s.spec.cell));
  }
  put_string(out, c.metadata);
  put<std::uint64_t>(out, c.parameters.size());
  for (double p : c.parameters) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(p));
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    raise(ErrorCode::Io, "not a checkpoint file");
  }
  Reader in(bytes);
  for (std::size_t i = 0; i < sizeof kMagic; ++i) in.get<std::uint8_t>();
  const auto version = in.get<std::uint32_t>();
  if (version != Checkpoint::kVersion) raise(ErrorCode::Io, "unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  const auto n_specs = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_specs; ++i) {
    NamedSpec s;
    s.name = in.get_string();
    s.spec.input_dim = static_cast<int>(in.get<std::uint32_t>());
    s.spec.hidden_dim = static_cast<int>(in.get<std::uint32_t>());
    s.spec.output_dim = static_cast<int>(in.get<std::uint32_t>());
    const auto cell = in.get<std::uint8_t>();
    if (cell > 1) raise(ErrorCode::Io, "bad cell type in checkpoint");
    s.spec.cell = static_cast<CellType>(cell);
    c.specs.push_back(std::move(s));
  }
  c.metadata = in.get_string();
  const auto n = in.get<std::uint64_t>();
  if (n > bytes.size() / 8) raise(ErrorCode::Io, "truncated checkpoint");
  c.parameters.resize(n);
  for (auto& p : c.parameters) p = std::bit_cast<double>(in.get<std::uint64_t>());
  if (!in.at_end()) raise(ErrorCode::Io, "trailing bytes in checkpoint");
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::Io, "cannot write " + path);
  const std::string bytes = encode_checkpoint(checkpoint);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) raise(ErrorCode::Io, "short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace cmarl::nn
