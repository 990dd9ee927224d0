#include "tnet/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>

#include <zlib.h>

#include "tnet/errors.hpp"

namespace tnet {
namespace {

constexpr std::string_view kMagic = "TNMPS1";
constexpr std::uint64_t kNoCenter = std::numeric_limits<std::uint64_t>::max();

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint32_t crc_of(std::string_view payload) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded chunks.
  const std::size_t chunk = 1u << 30;
  for (std::size_t off = 0; off < payload.size(); off += chunk) {
    const auto len = static_cast<uInt>(std::min(chunk, payload.size() - off));
    crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data() + off), len);
  }
  return static_cast<std::uint32_t>(crc);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw CheckpointError("checkpoint payload ends early");
  }
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string checkpoint_bytes(const MatrixProductState& psi) {
  std::string payload;
  put_u64(payload, psi.size());
  std::vector<DenseTensor> sites;
  sites.reserve(psi.size());
  for (const auto& t : psi.sites()) {
    sites.push_back(t.permuted({"l", "p", "r"}));
    for (auto d : sites.back().dims()) put_u64(payload, d);
  }
  for (const auto& t : sites) {
    for (const auto& v : t.data()) {
      put_f64(payload, v.real());
      put_f64(payload, v.imag());
    }
  }
  put_u64(payload, psi.center() ? static_cast<std::uint64_t>(*psi.center()) : kNoCenter);

  std::string out(kMagic);
  out += payload;
  const std::uint32_t crc = crc_of(payload);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((crc >> (8 * i)) & 0xffu));
  return out;
}

MatrixProductState checkpoint_parse(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw CheckpointError("not an MPS checkpoint (bad magic)");
  }
  if (bytes.size() < kMagic.size() + 8 + 8 + 4) throw CheckpointError("checkpoint is truncated");
  const auto payload = bytes.substr(kMagic.size(), bytes.size() - kMagic.size() - 4);
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[bytes.size() - 4 + i])) << (8 * i);
  }
  if (stored != crc_of(payload)) throw CheckpointError("checkpoint checksum mismatch");

  Reader in(payload);
  const std::uint64_t n = in.u64();
  if (n == 0 || n > in.remaining() / 24) throw CheckpointError("checkpoint site count is invalid");
  std::vector<std::vector<std::size_t>> dims(n);
  for (auto& d : dims) {
    for (int k = 0; k < 3; ++k) {
      const auto v = in.u64();
      if (v == 0 || v > (1u << 24)) throw CheckpointError("checkpoint bond or site extent is invalid");
      d.push_back(static_cast<std::size_t>(v));
    }
  }
  std::vector<DenseTensor> sites;
  sites.reserve(n);
  for (const auto& d : dims) {
    const std::size_t count = d[0] * d[1] * d[2];
    if (count > in.remaining() / 16) throw CheckpointError("checkpoint payload ends early");
    std::vector<cplx> data(count);
    for (auto& v : data) {
      const double re = in.f64();
      v = cplx(re, in.f64());
    }
    sites.emplace_back(d, std::vector<Label>{"l", "p", "r"}, std::move(data));
  }
  const std::uint64_t c = in.u64();
  if (in.remaining() != 0) throw CheckpointError("checkpoint has trailing bytes");
  std::optional<std::size_t> center;
  if (c != kNoCenter) {
    if (c >= n) throw CheckpointError("checkpoint center is out of range");
    center = static_cast<std::size_t>(c);
  }
  try {
    return MatrixProductState(std::move(sites), center);
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint is inconsistent: ") + e.what());
  }
}

void checkpoint_write(const MatrixProductState& psi, const std::filesystem::path& path) {
  const auto bytes = checkpoint_bytes(psi);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

MatrixProductState checkpoint_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_parse(buf.str());
}

}  // namespace tnet
