#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace apsim {

enum class ExperimentKind : std::uint8_t { QueueRoom, IonChannel, Ou, ReflectedOu, Mmwn, LimitCheck };

std::string_view kind_name(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);
std::vector<ExperimentKind> all_kinds();

/// Flat key/value parameter set for one experiment kind. Every key the kind
/// understands is present with its default until overridden.
class ExperimentConfig {
public:
  explicit ExperimentConfig(ExperimentKind kind);

  ExperimentKind kind() const { return kind_; }
  const std::map<std::string, std::string>& entries() const { return entries_; }
  std::string get(const std::string& key) const;
  void set(const std::string& key, std::string value);

  /// "[kind]" followed by sorted "key = value" lines.
  std::string canonical_text() const;
  /// FNV-1a 64 of canonical_text(), as 16 hex digits.
  std::string hash() const;

private:
  ExperimentKind kind_;
  std::map<std::string, std::string> entries_;
};

/// Reads an INI-style file: keys before any section apply to every kind,
/// keys inside `[kind]` only to that kind. Returns the config for `kind`;
/// other sections are ignored.
ExperimentConfig load_config(std::istream& in, ExperimentKind kind);
/// Section names present in the file (kinds only).
std::vector<ExperimentKind> sections_in(std::istream& in);

/// Parses "key=value" and applies it. Throws std::invalid_argument when the
/// text has no '='.
void apply_override(ExperimentConfig& config, std::string_view assignment);

struct Violation {
  std::string key;
  std::string message;
  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Pure check of every key; an empty result means the config is runnable.
std::vector<Violation> validate(const ExperimentConfig& config);

struct Manifest {
  std::filesystem::path root;
  std::vector<std::string> files;  // relative to root, in write order
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Thrown by run_experiment when validation fails.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(std::vector<Violation> v);
  const std::vector<Violation>& violations() const { return violations_; }

private:
  std::vector<Violation> violations_;
};

/// Runs the experiment and writes its artifacts plus manifest.json under
/// out_dir. `threads` bounds the replica worker pool (0 = hardware threads)
/// and never affects file contents.
Manifest run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                        unsigned threads = 0);

/// Output root when none is given: $APSIM_OUTPUT_ROOT or "apsim_out".
std::filesystem::path default_output_root();

}  // namespace apsim
