#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace gazby::harness {

// key=value run configuration ('#' starts a comment). CLI flags are applied
// as overrides after the file is read; the GAZBY_SEED environment variable
// overrides the seed last. A fixed seed makes the whole pipeline
// deterministic.
class RunConfig {
 public:
  RunConfig() = default;

  static RunConfig from_file(const std::string& path);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void apply_env_seed();

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key) const;                             // required
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long get_int(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t seed() const { return static_cast<std::uint64_t>(get_int("seed", 42)); }

  // throws unless every listed key names an existing file
  void require_files(const std::vector<std::string>& keys) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace gazby::harness
