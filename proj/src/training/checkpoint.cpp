#include "morphseg/training/checkpoint.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <zlib.h>

namespace morphseg::training {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'E', 'G', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t>& buffer() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw CheckpointIntegrityError("checkpoint ends unexpectedly");
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, bytes.data(), static_cast<uInt>(bytes.size()));
  return static_cast<std::uint32_t>(crc);
}

std::string exact(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
  return std::string(buf, end);
}

double parse_exact(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw CheckpointIntegrityError("bad floating-point field '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw CheckpointIntegrityError("bad integer field '" + s + "'");
  }
  return v;
}

std::string metadata_text(const Checkpoint& c) {
  const auto& cfg = c.params.config();
  std::ostringstream out;
  out << "mode=" << data::mode_name(c.meta.mode) << '\n'
      << "m=" << c.meta.m << '\n'
      << "seed=" << c.meta.seed << '\n'
      << "epoch=" << c.meta.epoch << '\n'
      << "dev_accuracy=" << exact(c.meta.dev_accuracy) << '\n'
      << "language=" << (c.meta.language ? data::language_code(*c.meta.language) : "") << '\n'
      << "hidden=" << cfg.hidden << '\n'
      << "embed=" << cfg.embed << '\n'
      << "attention=" << cfg.attention << '\n';
  return out.str();
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& c) {
  if (c.params.vocab_size() != c.vocab.size() || c.params.output_size() != c.vocab.output_size()) {
    throw std::invalid_argument("checkpoint parameters do not match its vocabulary");
  }
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  w.str(metadata_text(c));

  const auto symbols = c.vocab.symbols();
  w.u32(static_cast<std::uint32_t>(symbols.size()));
  for (const auto& s : symbols) w.str(s);

  const ad::ParamSet& arrays = c.params.arrays();
  w.u32(static_cast<std::uint32_t>(arrays.size()));
  for (ad::ParamId id = 0; id < arrays.size(); ++id) {
    const ad::Tensor& t = arrays.value(id);
    w.str(arrays.name(id));
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.u64(d);
    for (double v : t.data()) w.f64(v);
  }
  const std::uint32_t crc = checksum(w.buffer());
  w.u32(crc);
  return std::move(w.buffer());
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kMagic + 8 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw CheckpointIntegrityError("not a morphseg checkpoint");
  }
  Reader header(bytes.subspan(sizeof kMagic));
  const std::uint32_t version = header.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointVersionError("checkpoint format version " + std::to_string(version) +
                                 " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  if (checksum(body) != tail.u32()) throw CheckpointIntegrityError("checkpoint checksum mismatch");

  Reader r(body.subspan(sizeof kMagic + 4));
  std::map<std::string, std::string> meta;
  {
    std::istringstream lines(r.str());
    std::string line;
    while (std::getline(lines, line)) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw CheckpointIntegrityError("bad metadata line '" + line + "'");
      meta[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  auto field = [&](const std::string& key) -> const std::string& {
    auto it = meta.find(key);
    if (it == meta.end()) throw CheckpointIntegrityError("checkpoint metadata lacks '" + key + "'");
    return it->second;
  };

  CheckpointMeta m;
  const auto mode = data::parse_mode(field("mode"));
  if (!mode) throw CheckpointIntegrityError("unknown training mode '" + field("mode") + "'");
  m.mode = *mode;
  m.m = parse_uint(field("m"));
  m.seed = parse_uint(field("seed"));
  m.epoch = parse_uint(field("epoch"));
  m.dev_accuracy = parse_exact(field("dev_accuracy"));
  if (!field("language").empty()) {
    m.language = data::parse_language(field("language"));
    if (!m.language) throw CheckpointIntegrityError("unknown language '" + field("language") + "'");
  }
  model::ModelConfig cfg;
  cfg.hidden = parse_uint(field("hidden"));
  cfg.embed = parse_uint(field("embed"));
  cfg.attention = parse_uint(field("attention"));

  std::vector<std::string> symbols(r.u32());
  for (auto& s : symbols) s = r.str();
  data::Vocabulary vocab;
  try {
    vocab = data::Vocabulary::from_symbols(symbols);
  } catch (const data::DataError& e) {
    throw CheckpointIntegrityError(e.what());
  }

  ad::ParamSet arrays;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = r.str();
    std::vector<std::size_t> shape(r.u32());
    std::size_t n = 1;
    for (auto& d : shape) {
      d = r.u64();
      n *= d;
    }
    if (n > r.remaining() / 8) throw CheckpointIntegrityError("array '" + name + "' overruns the file");
    std::vector<double> values(n);
    for (auto& v : values) v = r.f64();
    arrays.add(std::move(name), ad::Tensor(std::move(shape), std::move(values)));
  }
  if (r.remaining() != 0) throw CheckpointIntegrityError("trailing bytes after parameter arrays");

  try {
    auto params = model::ModelParams::from_arrays(cfg, vocab.size(), vocab.output_size(), std::move(arrays));
    return Checkpoint{std::move(vocab), std::move(params), m};
  } catch (const std::invalid_argument& e) {
    throw CheckpointIntegrityError(std::string("checkpoint arrays do not fit the model: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const auto bytes = serialize_checkpoint(checkpoint);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + tmp.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing checkpoint '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace morphseg::training
