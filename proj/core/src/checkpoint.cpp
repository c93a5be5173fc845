#include "gazby/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "gazby/errors.hpp"

namespace gazby::harness {

namespace {

constexpr const char* kMagic = "GAZBY1";

void put_f32_le(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  out.push_back(static_cast<char>(bits & 0xFF));
  out.push_back(static_cast<char>((bits >> 8) & 0xFF));
  out.push_back(static_cast<char>((bits >> 16) & 0xFF));
  out.push_back(static_cast<char>((bits >> 24) & 0xFF));
}

float get_f32_le(const char* p) {
  const auto b = [&](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])); };
  const std::uint32_t bits = b(0) | (b(1) << 8) | (b(2) << 16) | (b(3) << 24);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& kind,
                     const std::map<std::string, std::string>& config, const std::vector<nn::Parameter*>& params) {
  for (const nn::Parameter* p : params) {
    if (!p->value.all_finite()) {
      throw NumericalError("checkpoint save: parameter '" + p->name + "' contains non-finite values");
    }
  }
  std::ostringstream header;
  header << kMagic << '\n';
  header << "kind " << kind << '\n';
  for (const auto& [k, v] : config) header << "config " << k << '=' << v << '\n';

  std::string payload;
  std::size_t offset = 0;
  std::ostringstream manifest;
  for (const nn::Parameter* p : params) {
    manifest << "param " << p->name << ' ' << p->value.rank();
    for (int d : p->value.shape()) manifest << ' ' << d;
    manifest << ' ' << offset << '\n';
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      put_f32_le(payload, static_cast<float>(p->value[i]));
    }
    offset += 4 * p->value.size();
  }
  header << manifest.str();
  header << "payload " << payload.size() << '\n';

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write checkpoint: " + path);
  const std::string head = header.str();
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw ValidationError("checkpoint write failed: " + path);
}

namespace {

CheckpointHeader parse_header(std::istream& in, const std::string& path, std::size_t& header_bytes) {
  CheckpointHeader hdr;
  std::string line;
  header_bytes = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) throw ValidationError("checkpoint truncated in header: " + path);
    header_bytes += line.size() + 1;
  };
  next_line();
  if (line != kMagic) throw ValidationError("not a gazby checkpoint (bad magic): " + path);
  while (true) {
    next_line();
    if (line.rfind("payload ", 0) == 0) {
      hdr.payload_bytes = static_cast<std::size_t>(std::stoull(line.substr(8)));
      break;
    }
    if (line.rfind("kind ", 0) == 0) {
      hdr.kind = line.substr(5);
    } else if (line.rfind("config ", 0) == 0) {
      const std::string kv = line.substr(7);
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ValidationError("malformed config line in checkpoint: " + line);
      hdr.config[kv.substr(0, eq)] = kv.substr(eq + 1);
    } else if (line.rfind("param ", 0) == 0) {
      std::istringstream is(line.substr(6));
      CheckpointHeader::Entry e;
      int rank = 0;
      if (!(is >> e.name >> rank) || rank < 0) throw ValidationError("malformed param line in checkpoint: " + line);
      e.shape.resize(static_cast<std::size_t>(rank));
      for (int d = 0; d < rank; ++d) {
        if (!(is >> e.shape[static_cast<std::size_t>(d)])) {
          throw ValidationError("malformed param line in checkpoint: " + line);
        }
      }
      if (!(is >> e.offset)) throw ValidationError("malformed param line in checkpoint: " + line);
      hdr.params.push_back(std::move(e));
    } else {
      throw ValidationError("unrecognized checkpoint header line: " + line);
    }
  }
  return hdr;
}

}  // namespace

CheckpointHeader read_checkpoint_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path);
  std::size_t header_bytes = 0;
  return parse_header(in, path, header_bytes);
}

void load_checkpoint(const std::string& path, const std::string& kind,
                     const std::map<std::string, std::string>& expected_config,
                     const std::vector<nn::Parameter*>& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint: " + path);
  std::size_t header_bytes = 0;
  CheckpointHeader hdr = parse_header(in, path, header_bytes);

  if (hdr.kind != kind) {
    throw ValidationError("checkpoint kind mismatch: file holds '" + hdr.kind + "', expected '" + kind + "'");
  }
  for (const auto& [k, v] : expected_config) {
    auto it = hdr.config.find(k);
    if (it == hdr.config.end()) {
      throw ValidationError("checkpoint config is missing key '" + k + "' (expected " + v + ")");
    }
    if (it->second != v) {
      throw ValidationError("checkpoint config mismatch on '" + k + "': file has " + it->second + ", model needs " +
                            v);
    }
  }
  for (const auto& [k, v] : hdr.config) {
    if (!expected_config.count(k)) {
      throw ValidationError("checkpoint config has unexpected key '" + k + "=" + v + "'");
    }
  }

  std::string payload(hdr.payload_bytes, '\0');
  in.read(payload.data(), static_cast<std::streamsize>(hdr.payload_bytes));
  const std::size_t actually_read = static_cast<std::size_t>(in.gcount());

  std::unordered_map<std::string, const CheckpointHeader::Entry*> by_name;
  for (const auto& e : hdr.params) by_name[e.name] = &e;
  if (by_name.size() != params.size()) {
    throw ValidationError("checkpoint holds " + std::to_string(by_name.size()) + " parameters, model has " +
                          std::to_string(params.size()));
  }
  for (nn::Parameter* p : params) {
    auto it = by_name.find(p->name);
    if (it == by_name.end()) {
      throw ValidationError("checkpoint is missing parameter '" + p->name + "'");
    }
    const CheckpointHeader::Entry& e = *it->second;
    if (e.shape != p->value.shape()) {
      throw ValidationError("checkpoint shape drift for '" + p->name + "': file has " + nn::shape_string(e.shape) +
                            ", model has " + nn::shape_string(p->value.shape()));
    }
    const std::size_t need = e.offset + 4 * p->value.size();
    if (need > actually_read) {
      throw ValidationError("checkpoint payload truncated at parameter '" + p->name + "'");
    }
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->value[i] = static_cast<double>(get_f32_le(payload.data() + e.offset + 4 * i));
    }
    p->zero_grad();
  }
}

}  // namespace gazby::harness
