#include "specpart/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

namespace specpart {
namespace {

constexpr char kMagic[8] = {'S', 'P', 'E', 'C', 'P', 'A', 'R', 'T'};

std::uint64_t fnv1a(const char* data, std::size_t size) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
 public:
  template <class T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    buf_.append(reinterpret_cast<const char*>(&value), sizeof(T));
  }
  void put_bytes(const void* data, std::size_t size) { buf_.append(static_cast<const char*>(data), size); }
  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    buf_.append(s);
  }
  std::string& buffer() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  Reader(const std::string& buf, std::size_t end) : buf_(buf), end_(end) {}

  template <class T>
  T get() {
    T value;
    get_bytes(&value, sizeof(T));
    return value;
  }
  void get_bytes(void* out, std::size_t size) {
    if (size > end_ - pos_) throw CheckpointError("checkpoint is truncated");
    std::memcpy(out, buf_.data() + pos_, size);
    pos_ += size;
  }
  std::string get_string() {
    const auto size = get<std::uint64_t>();
    if (size > end_ - pos_) throw CheckpointError("checkpoint is truncated");
    std::string s = buf_.substr(pos_, size);
    pos_ += size;
    return s;
  }
  bool done() const { return pos_ == end_; }

 private:
  const std::string& buf_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

void put_record(Writer& w, const IterationRecord& r) {
  w.put<std::int32_t>(r.iteration);
  w.put(r.energy);
  w.put(r.step);
  w.put<std::uint8_t>(r.accepted);
  w.put<std::int64_t>(r.min_size);
  w.put<std::int64_t>(r.max_size);
  w.put(r.mean_size);
  w.put(r.seconds);
}

IterationRecord get_record(Reader& r) {
  IterationRecord rec;
  rec.iteration = r.get<std::int32_t>();
  rec.energy = r.get<double>();
  rec.step = r.get<double>();
  rec.accepted = r.get<std::uint8_t>() != 0;
  rec.min_size = r.get<std::int64_t>();
  rec.max_size = r.get<std::int64_t>();
  rec.mean_size = r.get<double>();
  rec.seconds = r.get<double>();
  return rec;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  Writer w;
  w.put_bytes(kMagic, sizeof kMagic);
  w.put<std::uint32_t>(Checkpoint::kVersion);
  w.put_string(c.config.dump());
  w.put<std::int32_t>(c.level);
  w.put<std::uint8_t>(c.finished);
  w.put<std::int32_t>(c.iteration);
  w.put(c.step);

  const DensitySet& d = c.densities;
  w.put<std::uint8_t>(d.mode == ConstraintMode::kMultiphase);
  w.put<std::int64_t>(d.nodes());
  w.put<std::int32_t>(d.count());
  w.put_bytes(d.cells.data(), sizeof(double) * static_cast<std::size_t>(d.cells.size()));
  if (d.mode == ConstraintMode::kMultiphase) {
    w.put_bytes(d.void_phase.data(), sizeof(double) * static_cast<std::size_t>(d.void_phase.size()));
  }

  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.levels.size()));
  for (const auto& level : c.levels) {
    w.put<std::int32_t>(level.resolution);
    w.put_string(level.stop_reason);
    w.put(level.seconds);
    w.put<std::int32_t>(level.vanish_events);
    w.put<std::uint64_t>(level.records.size());
    for (const auto& r : level.records) put_record(w, r);
  }
  std::string& buf = w.buffer();
  const std::uint64_t sum = fnv1a(buf.data(), buf.size());
  buf.append(reinterpret_cast<const char*>(&sum), sizeof sum);

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) throw std::runtime_error("cannot write checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  const std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof kMagic + 4 + 8 || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
    throw CheckpointError(path.string() + " is not a checkpoint");
  }
  const std::size_t body = buf.size() - sizeof(std::uint64_t);
  std::uint64_t stored;
  std::memcpy(&stored, buf.data() + body, sizeof stored);
  if (stored != fnv1a(buf.data(), body)) throw CheckpointError("checkpoint checksum mismatch: " + path.string());

  Reader r(buf, body);
  char magic[sizeof kMagic];
  r.get_bytes(magic, sizeof magic);
  const auto version = r.get<std::uint32_t>();
  if (version != Checkpoint::kVersion) {
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  try {
    c.config = nlohmann::json::parse(r.get_string());
  } catch (const nlohmann::json::parse_error&) {
    throw CheckpointError("checkpoint config is not valid JSON");
  }
  c.level = r.get<std::int32_t>();
  c.finished = r.get<std::uint8_t>() != 0;
  c.iteration = r.get<std::int32_t>();
  c.step = r.get<double>();

  DensitySet& d = c.densities;
  d.mode = r.get<std::uint8_t>() ? ConstraintMode::kMultiphase : ConstraintMode::kPartition;
  const auto nodes = r.get<std::int64_t>();
  const auto count = r.get<std::int32_t>();
  if (nodes <= 0 || count <= 0 || static_cast<std::uint64_t>(nodes) * count > body / sizeof(double)) {
    throw CheckpointError("checkpoint density block is inconsistent");
  }
  d.cells.resize(nodes, count);
  r.get_bytes(d.cells.data(), sizeof(double) * static_cast<std::size_t>(d.cells.size()));
  if (d.mode == ConstraintMode::kMultiphase) {
    d.void_phase.resize(nodes);
    r.get_bytes(d.void_phase.data(), sizeof(double) * static_cast<std::size_t>(nodes));
  }

  const auto levels = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < levels; ++i) {
    LevelTrace t;
    t.resolution = r.get<std::int32_t>();
    t.stop_reason = r.get_string();
    t.seconds = r.get<double>();
    t.vanish_events = r.get<std::int32_t>();
    const auto records = r.get<std::uint64_t>();
    for (std::uint64_t k = 0; k < records; ++k) t.records.push_back(get_record(r));
    c.levels.push_back(std::move(t));
  }
  if (!r.done()) throw CheckpointError("checkpoint has trailing data");
  return c;
}

}  // namespace specpart
