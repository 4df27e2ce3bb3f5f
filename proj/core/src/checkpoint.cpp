#include "stpen/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "stpen/annotation.hpp"
#include "stpen/config_io.hpp"
#include "stpen/errors.hpp"
#include "stpen/hash.hpp"
#include "stpen/vocab.hpp"

namespace stpen {
namespace {

constexpr char kMagic[5] = {'S', 'T', 'P', 'E', 'N'};
constexpr std::size_t kPrefixSize = 5 + 2 + 8 + 8;

using Kind = CheckpointError::Kind;

template <class T>
void put(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

class Reader {
 public:
  Reader(const std::string& bytes, std::size_t pos, std::size_t end) : bytes_(bytes), pos_(pos), end_(end) {}

  template <class T>
  T get() {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::string take(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == end_; }

 private:
  void need(std::size_t n) const {
    if (end_ - pos_ < n) throw CheckpointError(Kind::kFormat, "checkpoint payload ends inside a record");
  }
  const std::string& bytes_;
  std::size_t pos_;
  std::size_t end_;
};

void put_table(std::string& out, const ParamSet& table) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(table.size()));
  for (const auto& [path, t] : table) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(path.size()));
    out += path;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (double v : t.storage()) put<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
}

ParamSet get_table(Reader& in) {
  ParamSet table;
  const auto count = in.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string path = in.take(in.get<std::uint32_t>());
    const auto rank = in.get<std::uint32_t>();
    if (rank == 0 || rank > 8) throw CheckpointError(Kind::kFormat, "tensor '" + path + "' has rank " + std::to_string(rank));
    Shape shape;
    for (std::uint32_t r = 0; r < rank; ++r) shape.push_back(in.get<std::uint32_t>());
    Tensor t;
    try {
      t = Tensor(shape);
    } catch (const ShapeError& e) {
      throw CheckpointError(Kind::kFormat, "tensor '" + path + "': " + e.what());
    }
    for (auto& v : t.storage()) v = std::bit_cast<float>(in.get<std::uint32_t>());
    try {
      table.add(path, std::move(t));
    } catch (const ConsistencyError& e) {
      throw CheckpointError(Kind::kFormat, e.what());
    }
  }
  return table;
}

}  // namespace

std::vector<std::string> current_vocab() { return {kBehaviorNames.begin(), kBehaviorNames.end()}; }

void require_compatible_vocab(const std::vector<std::string>& vocab) {
  if (vocab != current_vocab()) {
    throw CompatibilityError("checkpoint vocabulary (" + std::to_string(vocab.size()) +
                             " behaviors) does not match the annotation vocabulary (" +
                             std::to_string(kNumBehaviors) + " behaviors)");
  }
}

std::string encode_checkpoint(const Checkpoint& c) {
  nlohmann::ordered_json header = {{"model", to_json(c.model)}, {"train", to_json(c.train)}, {"epoch", c.epoch},
                                   {"rng_state", c.rng_state},  {"vocab", c.vocab}};
  const std::string header_text = header.dump();
  std::string payload;
  put<std::uint32_t>(payload, static_cast<std::uint32_t>(header_text.size()));
  payload += header_text;
  put_table(payload, c.params);
  put_table(payload, c.velocity);

  std::string out(kMagic, sizeof(kMagic));
  put<std::uint16_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, payload.size());
  put<std::uint64_t>(out, fnv1a64(payload));
  return out + payload;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    if (bytes.size() < sizeof(kMagic)) throw CheckpointError(Kind::kTruncated, "checkpoint truncated inside the magic");
    throw CheckpointError(Kind::kBadMagic, "not a checkpoint (bad magic)");
  }
  if (bytes.size() < kPrefixSize) throw CheckpointError(Kind::kTruncated, "checkpoint truncated inside the header");
  Reader prefix(bytes, sizeof(kMagic), kPrefixSize);
  const auto version = prefix.get<std::uint16_t>();
  if (version != kCheckpointVersion) {
    throw CheckpointError(Kind::kVersion, "checkpoint version " + std::to_string(version) + ", expected " +
                                              std::to_string(kCheckpointVersion));
  }
  const auto size = prefix.get<std::uint64_t>();
  const auto digest = prefix.get<std::uint64_t>();
  if (bytes.size() - kPrefixSize < size) {
    throw CheckpointError(Kind::kTruncated, "checkpoint truncated: payload has " +
                                                std::to_string(bytes.size() - kPrefixSize) + " of " +
                                                std::to_string(size) + " bytes");
  }
  if (bytes.size() - kPrefixSize > size) throw CheckpointError(Kind::kFormat, "trailing bytes after checkpoint payload");
  const std::string_view payload(bytes.data() + kPrefixSize, size);
  if (fnv1a64(payload) != digest) throw CheckpointError(Kind::kDigest, "checkpoint digest mismatch (corrupted payload)");

  Reader in(bytes, kPrefixSize, bytes.size());
  Checkpoint c;
  try {
    const auto header = nlohmann::json::parse(in.take(in.get<std::uint32_t>()));
    c.model = model_config_from_json(header.at("model"));
    c.train = train_config_from_json(header.at("train"));
    c.epoch = header.at("epoch").get<std::size_t>();
    c.rng_state = header.at("rng_state").get<std::string>();
    c.vocab = header.at("vocab").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(Kind::kFormat, std::string("checkpoint header: ") + e.what());
  } catch (const ParseError& e) {
    throw CheckpointError(Kind::kFormat, std::string("checkpoint header: ") + e.what());
  }
  c.params = get_table(in);
  c.velocity = get_table(in);
  if (!in.done()) throw CheckpointError(Kind::kFormat, "unparsed bytes at the end of the checkpoint payload");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  try {
    write_text_file(path, encode_checkpoint(ckpt));
  } catch (const std::exception& e) {
    throw CheckpointError(Kind::kIo, e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::kIo, "cannot open checkpoint '" + path.string() + "'");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace stpen
