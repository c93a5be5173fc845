#pragma once

#include <map>
#include <string>
#include <vector>

#include "gazby/autodiff.hpp"

namespace gazby::harness {

// Checkpoint layout: a text header followed by a raw payload.
//
//   GAZBY1
//   kind <cross|bi|gaze>
//   config <key>=<value>        one line per config entry, sorted by key
//   param <name> <rank> <extents...> <byte offset>
//   payload <byte count>
//   <little-endian float32 values, row-major, in param-line order>
//
// Parameter values are float32-representable by construction, so the payload
// encodes them exactly and load(save(m)) reproduces scores bitwise.
struct CheckpointHeader {
  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::size_t offset = 0;
  };

  std::string kind;
  std::map<std::string, std::string> config;
  std::vector<Entry> params;
  std::size_t payload_bytes = 0;
};

void save_checkpoint(const std::string& path, const std::string& kind,
                     const std::map<std::string, std::string>& config, const std::vector<nn::Parameter*>& params);

CheckpointHeader read_checkpoint_header(const std::string& path);

// Loads values into `params`, matched by name. Refuses with a diagnostic on
// kind mismatch, on any config key that differs from `expected_config`, on
// missing/extra/mis-shaped parameters, and on payloads shorter than the
// manifest promises (naming the parameter that comes up short).
void load_checkpoint(const std::string& path, const std::string& kind,
                     const std::map<std::string, std::string>& expected_config,
                     const std::vector<nn::Parameter*>& params);

}  // namespace gazby::harness
