#include "topicshift/adapter.hpp"

#include <algorithm>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "topicshift/error.hpp"

extern char** environ;

namespace topicshift {

bool AdapterCapabilities::supports(std::string_view op) const {
  return std::find(ops.begin(), ops.end(), op) != ops.end();
}

AdapterProcess::AdapterProcess(std::filesystem::path executable, std::vector<std::string> args)
    : executable_(std::move(executable)) {
  // A dead child must surface as EPIPE, not kill the host.
  std::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0) throw AdapterError(std::string("pipe failed: ") + std::strerror(errno));
  if (pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw AdapterError(std::string("pipe failed: ") + std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);

  std::vector<std::string> argv_storage;
  argv_storage.push_back(executable_.string());
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  int rc = posix_spawn(&pid, executable_.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw AdapterError("cannot start adapter " + executable_.string() + ": " + std::strerror(rc));
  }
  pid_ = pid;
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
}

AdapterProcess::~AdapterProcess() {
  try {
    close();
  } catch (...) {
  }
}

int AdapterProcess::close() {
  if (pid_ < 0) return 0;
  if (to_child_ >= 0) ::close(to_child_);
  to_child_ = -1;
  int status = 0;
  while (waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  pid_ = -1;
  if (from_child_ >= 0) ::close(from_child_);
  from_child_ = -1;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string AdapterProcess::read_line() {
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw AdapterError("adapter closed its output stream", buffer_);
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string AdapterProcess::exchange(const std::string& line) {
  if (pid_ < 0) throw AdapterError("adapter process is not running");
  if (line.find('\n') != std::string::npos) throw AdapterError("request contains a newline", line);
  std::string out = line + '\n';
  std::size_t off = 0;
  while (off < out.size()) {
    ssize_t n = ::write(to_child_, out.data() + off, out.size() - off);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) throw AdapterError(std::string("write to adapter failed: ") + std::strerror(errno), line);
    off += static_cast<std::size_t>(n);
  }
  return read_line();
}

nlohmann::json AdapterProcess::request(const nlohmann::json& message) {
  const std::string line = exchange(frame(message));
  nlohmann::json response;
  try {
    response = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    throw AdapterError("adapter sent malformed JSON", line);
  }
  if (!response.is_object()) throw AdapterError("adapter response is not an object", line);
  if (response.contains("error")) {
    std::string what = "adapter error";
    const auto& e = response.at("error");
    what += ": " + (e.is_string() ? e.get<std::string>() : e.dump());
    if (response.contains("detail")) {
      const auto& d = response.at("detail");
      what += " (" + (d.is_string() ? d.get<std::string>() : d.dump()) + ")";
    }
    throw AdapterError(what, line);
  }
  return response;
}

const AdapterCapabilities& AdapterProcess::handshake() {
  auto r = request({{"op", "handshake"}, {"protocol_version", kAdapterProtocolVersion}});
  AdapterCapabilities caps;
  caps.raw = r;
  caps.protocol_version = r.value("protocol_version", 0);
  if (caps.protocol_version != kAdapterProtocolVersion) {
    throw AdapterError("adapter speaks protocol version " + std::to_string(caps.protocol_version) +
                           ", expected " + std::to_string(kAdapterProtocolVersion),
                       r.dump());
  }
  caps.genres = r.value("genres", std::vector<std::string>{});
  caps.ops = r.value("ops", std::vector<std::string>{});
  caps_ = std::move(caps);
  return *caps_;
}

const AdapterCapabilities& AdapterProcess::capabilities() const {
  if (!caps_) throw AdapterError("handshake has not completed");
  return *caps_;
}

std::optional<std::filesystem::path> adapter_from_environment() {
  const char* v = std::getenv(kAdapterEnv);
  if (!v || !*v) return std::nullopt;
  return std::filesystem::path(v);
}

}  // namespace topicshift
