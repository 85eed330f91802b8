#include "cdcnet/tensor/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace cdcnet {

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  void bytes(void* p, std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) {
      throw DataError("checkpoint truncated at byte " + std::to_string(pos_) + " while reading " + what);
    }
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    bytes(&v, 4, what);
    return v;
  }
  std::uint8_t u8(const char* what) {
    std::uint8_t v;
    bytes(&v, 1, what);
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) throw DataError(std::string(what) + " exceeds u32 range");
  return static_cast<std::uint32_t>(v);
}

template <class T>
void write_tensor(Writer& w, const Tensor<T>& t) {
  const Shape& s = t.shape();
  w.u32(checked_u32(s.n, "shape N"));
  w.u32(checked_u32(s.c, "shape C"));
  w.u32(checked_u32(s.h, "shape H"));
  w.u32(checked_u32(s.w, "shape W"));
  w.u8(static_cast<std::uint8_t>(element_kind_of<T>()));
  w.bytes(t.raw(), t.numel() * sizeof(T));
}

template <class T>
Tensor<T> read_payload(Reader& r, const Shape& s) {
  std::size_t count = 1;
  for (std::size_t d : {s.n, s.c, s.h, s.w}) {
    if (__builtin_mul_overflow(count, d, &count)) {
      throw DataError("checkpoint tensor dimensions overflow at byte " + std::to_string(r.pos()));
    }
  }
  if (count > r.remaining() / sizeof(T)) {
    throw DataError("checkpoint truncated at byte " + std::to_string(r.pos()) + " (tensor payload of " +
                    std::to_string(count) + " elements)");
  }
  std::vector<T> data(count);
  r.bytes(data.data(), count * sizeof(T), "tensor payload");
  return Tensor<T>(s, std::move(data));
}

}  // namespace

const Shape& CheckpointEntry::shape() const {
  return std::visit([](const auto& t) -> const Shape& { return t.shape(); }, tensor);
}

template <class T>
Tensor<T> CheckpointEntry::as() const {
  return std::visit(
      [](const auto& t) -> Tensor<T> {
        using U = typename std::decay_t<decltype(t)>::value_type;
        if constexpr (std::is_same_v<U, T>) return t;
        else return t.template cast<T>();
      },
      tensor);
}

template Tensor<float> CheckpointEntry::as<float>() const;
template Tensor<double> CheckpointEntry::as<double>() const;

const CheckpointEntry* Checkpoint::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ck) {
  Writer w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(checked_u32(ck.header.size(), "header length"));
  w.bytes(ck.header.data(), ck.header.size());
  w.u32(checked_u32(ck.entries.size(), "entry count"));
  for (const auto& e : ck.entries) {
    w.u32(checked_u32(e.name.size(), "name length"));
    w.bytes(e.name.data(), e.name.size());
    std::visit([&](const auto& t) { write_tensor(w, t); }, e.tensor);
  }
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[4];
  r.bytes(magic, 4, "magic");
  if (std::memcmp(magic, kCheckpointMagic, 4) != 0) throw DataError("checkpoint: bad magic at byte 0");
  const std::uint32_t version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint: unsupported version " + std::to_string(version) + " at byte 4");
  }
  Checkpoint ck;
  const std::uint32_t header_len = r.u32("header length");
  if (header_len > r.remaining()) throw DataError("checkpoint truncated at byte " + std::to_string(r.pos()) + " (header)");
  ck.header.resize(header_len);
  r.bytes(ck.header.data(), header_len, "header");
  const std::uint32_t count = r.u32("entry count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32("name length");
    if (name_len > r.remaining()) throw DataError("checkpoint truncated at byte " + std::to_string(r.pos()) + " (name)");
    std::string name(name_len, '\0');
    r.bytes(name.data(), name_len, "name");
    Shape s;
    s.n = r.u32("shape");
    s.c = r.u32("shape");
    s.h = r.u32("shape");
    s.w = r.u32("shape");
    const std::size_t kind_at = r.pos();
    const std::uint8_t kind = r.u8("element kind");
    if (kind == static_cast<std::uint8_t>(ElementKind::f32)) {
      ck.entries.push_back(CheckpointEntry{std::move(name), read_payload<float>(r, s)});
    } else if (kind == static_cast<std::uint8_t>(ElementKind::f64)) {
      ck.entries.push_back(CheckpointEntry{std::move(name), read_payload<double>(r, s)});
    } else {
      throw DataError("checkpoint: unknown element kind " + std::to_string(kind) + " at byte " +
                      std::to_string(kind_at));
    }
  }
  if (r.remaining() != 0) throw DataError("checkpoint: trailing bytes at byte " + std::to_string(r.pos()));
  return ck;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const auto bytes = encode_checkpoint(ck);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace cdcnet
