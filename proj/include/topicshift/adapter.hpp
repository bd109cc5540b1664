#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace topicshift {

inline constexpr int kAdapterProtocolVersion = 1;
/// Environment variable naming the adapter executable.
inline constexpr const char* kAdapterEnv = "TOPICSHIFT_ADAPTER";

struct AdapterCapabilities {
  int protocol_version = 0;
  std::vector<std::string> genres;
  std::vector<std::string> ops;
  nlohmann::json raw;

  bool supports(std::string_view op) const;
};

/// A child process speaking line-delimited JSON on stdin/stdout. One request
/// yields exactly one response line. Not thread-safe; callers serialize.
class AdapterProcess {
 public:
  explicit AdapterProcess(std::filesystem::path executable, std::vector<std::string> args = {});
  ~AdapterProcess();
  AdapterProcess(const AdapterProcess&) = delete;
  AdapterProcess& operator=(const AdapterProcess&) = delete;

  /// Sends the handshake; throws AdapterError on version mismatch.
  const AdapterCapabilities& handshake();
  const AdapterCapabilities& capabilities() const;

  /// Sends one request and returns the parsed response. A response carrying an
  /// "error" member raises AdapterError with the raw line as payload.
  nlohmann::json request(const nlohmann::json& message);

  /// Writes `line` (no trailing newline) and returns the raw response line.
  std::string exchange(const std::string& line);

  /// Closes stdin and reaps the child; returns its exit status.
  int close();

  static std::string frame(const nlohmann::json& message) { return message.dump(); }

 private:
  std::string read_line();

  std::filesystem::path executable_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::optional<AdapterCapabilities> caps_;
};

/// Executable named by TOPICSHIFT_ADAPTER, if set and non-empty.
std::optional<std::filesystem::path> adapter_from_environment();

}  // namespace topicshift
