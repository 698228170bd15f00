#include "nlpr/autodiff/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "nlpr/error.hpp"

namespace nlpr::ad {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'P', 'R', 'C', 'K', 'P', '1'};

template <typename U>
void put_le(std::string& out, U v) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename U>
  U get_le(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(U);
    return v;
  }

  std::string get_bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("checkpoint truncated while reading ") + what, 0);
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const Matrix<double>& Checkpoint::at(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return t.value;
  }
  throw ContractError("checkpoint has no tensor named '" + name + "'");
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return true;
  }
  return false;
}

std::string encode_checkpoint(const Checkpoint& checkpoint) {
  std::string out(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.metadata.size()));
  out += checkpoint.metadata;
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const auto& t : checkpoint.tensors) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_le<std::uint32_t>(out, 2);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(t.value.rows()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(t.value.cols()));
    for (Index i = 0; i < t.value.size(); ++i) {
      put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(t.value.data()[i]));
    }
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  if (in.get_bytes(sizeof(kMagic), "magic") != std::string(kMagic, sizeof(kMagic))) {
    throw ParseError("not a checkpoint file (bad magic)", 0);
  }
  Checkpoint ckpt;
  ckpt.metadata = in.get_bytes(in.get_le<std::uint32_t>("metadata length"), "metadata");
  const auto count = in.get_le<std::uint32_t>("tensor count");
  for (std::uint32_t k = 0; k < count; ++k) {
    NamedMatrix t;
    t.name = in.get_bytes(in.get_le<std::uint32_t>("name length"), "name");
    const auto ndim = in.get_le<std::uint32_t>("rank");
    std::vector<std::uint64_t> dims(ndim);
    for (auto& d : dims) d = in.get_le<std::uint64_t>("dimension");
    // Rank 0/1 tensors load as column vectors; higher ranks fold trailing dims into columns.
    std::uint64_t rows = ndim == 0 ? 1 : dims[0];
    std::uint64_t cols = 1;
    for (std::uint32_t d = 1; d < ndim; ++d) cols *= dims[d];
    t.value.resize(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index i = 0; i < t.value.size(); ++i) {
      t.value.data()[i] = std::bit_cast<double>(in.get_le<std::uint64_t>("tensor data"));
    }
    ckpt.tensors.push_back(std::move(t));
  }
  if (!in.done()) throw ParseError("trailing bytes after checkpoint tensors", 0);
  return ckpt;
}

std::string manifest_text(const Checkpoint& checkpoint) {
  std::ostringstream os;
  for (const auto& t : checkpoint.tensors) {
    os << t.name << ' ' << t.value.rows() << 'x' << t.value.cols() << '\n';
  }
  return os.str();
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const std::string bytes = encode_checkpoint(checkpoint);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  std::ofstream manifest(path.string() + ".manifest", std::ios::trunc);
  manifest << manifest_text(checkpoint);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return decode_checkpoint(buffer.str());
}

}  // namespace nlpr::ad
