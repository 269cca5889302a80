#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>
#include <thread>

#include <json.hpp>

#include "qesa/error.hpp"
#include "qesa/ising.hpp"
#include "qesa/samplers.hpp"

namespace qesa {

// Wire protocol, one JSON object per line on the child's standard streams:
//
//   request  (stdin):  {"n": 3, "h": [..], "J": [[i, j, value], ..], "num_samples": 1000}
//   response (stdout): {"samples": [[-1, 1, 1], [1, 1, -1], ..]}
//
// The offset never crosses the wire. Energies are recomputed locally.

inline constexpr const char* kExternalSamplerEnv = "QESA_EXTERNAL_SAMPLER";

class ExternalSamplerError : public Error {
public:
  enum class Kind { Launch, Protocol, Validation, Timeout };

  ExternalSamplerError(Kind kind, const std::string& what) : Error(prefix(kind) + what), kind_(kind) {}
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

private:
  static std::string prefix(Kind k) {
    switch (k) {
      case Kind::Launch: return "external sampler launch failure: ";
      case Kind::Protocol: return "external sampler protocol error: ";
      case Kind::Validation: return "external sampler validation error: ";
      case Kind::Timeout: return "external sampler timeout: ";
    }
    return "external sampler error: ";
  }
  Kind kind_;
};

inline nlohmann::json ising_request_json(const IsingModel& m, std::size_t num_samples) {
  nlohmann::json couplings = nlohmann::json::array();
  for (const auto& c : m.couplings()) couplings.push_back({c.i, c.j, c.value});
  return {{"n", m.n()}, {"h", m.h()}, {"J", std::move(couplings)}, {"num_samples", num_samples}};
}

/// Resolves the configured command: explicit config first, then the environment.
inline std::optional<std::string> external_sampler_command(const SamplerConfig& cfg) {
  if (cfg.external_command && !cfg.external_command->empty()) return cfg.external_command;
  if (const char* env = std::getenv(kExternalSamplerEnv); env != nullptr && *env != '\0') return std::string(env);
  return std::nullopt;
}

namespace detail {

struct ProcessOutput {
  int exit_status = 0;
  std::string out;
};

/// Runs `sh -c command`, feeds `input` on stdin, collects stdout until EOF.
/// stdin and stdout share one socketpair so writes never raise SIGPIPE.
inline ProcessOutput run_process(const std::string& command, const std::string& input,
                                 std::chrono::duration<double> timeout) {
  using Kind = ExternalSamplerError::Kind;
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0)
    throw ExternalSamplerError(Kind::Launch, std::string("socketpair: ") + std::strerror(errno));

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(sv[0]);
    ::close(sv[1]);
    throw ExternalSamplerError(Kind::Launch, std::string("fork: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(sv[1]);
  const int fd = sv[0];
  ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);

  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(timeout);
  const auto kill_child = [&] {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    ::waitpid(pid, nullptr, 0);
    ::close(fd);
  };

  ProcessOutput result;
  std::size_t written = 0;
  bool write_open = true;
  bool read_open = true;
  char buf[65536];
  while (read_open) {
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      kill_child();
      throw ExternalSamplerError(Kind::Timeout, "no complete response within " + std::to_string(timeout.count()) + " s");
    }
    if (write_open && written == input.size()) {
      ::shutdown(fd, SHUT_WR);
      write_open = false;
    }
    pollfd p{fd, static_cast<short>(POLLIN | (write_open ? POLLOUT : 0)), 0};
    const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1;
    const int rc = ::poll(&p, 1, static_cast<int>(std::min<long long>(wait_ms, 1000)));
    if (rc < 0 && errno != EINTR) {
      kill_child();
      throw ExternalSamplerError(Kind::Launch, std::string("poll: ") + std::strerror(errno));
    }
    if (rc <= 0) continue;
    if (write_open && (p.revents & POLLOUT)) {
      const ssize_t w = ::send(fd, input.data() + written, input.size() - written, MSG_NOSIGNAL);
      if (w > 0) {
        written += static_cast<std::size_t>(w);
      } else if (w < 0 && errno != EAGAIN && errno != EINTR) {
        write_open = false;  // child stopped reading; still collect what it wrote
        written = input.size();
      }
    }
    if (p.revents & (POLLIN | POLLHUP | POLLERR)) {
      const ssize_t r = ::recv(fd, buf, sizeof buf, 0);
      if (r > 0) {
        result.out.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || (errno != EAGAIN && errno != EINTR)) {
        read_open = false;
      }
    }
  }
  ::close(fd);

  int status = 0;
  for (;;) {
    const pid_t w = ::waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (w < 0 && errno != EINTR) throw ExternalSamplerError(Kind::Launch, std::string("waitpid: ") + std::strerror(errno));
    if (std::chrono::steady_clock::now() >= deadline) {
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
      ::waitpid(pid, nullptr, 0);
      throw ExternalSamplerError(Kind::Timeout, "process did not exit after closing its output");
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  result.exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + (WIFSIGNALED(status) ? WTERMSIG(status) : 0);
  return result;
}

}  // namespace detail

/// Parses a response line and validates every spin vector against n.
inline std::vector<SpinVector> parse_sampler_response(const std::string& text, std::size_t n) {
  using Kind = ExternalSamplerError::Kind;
  std::size_t begin = 0;
  std::string line;
  while (begin < text.size()) {
    std::size_t end = text.find('\n', begin);
    if (end == std::string::npos) end = text.size();
    line = text.substr(begin, end - begin);
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
    line.clear();
    begin = end + 1;
  }
  if (line.empty()) throw ExternalSamplerError(Kind::Protocol, "empty response");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ExternalSamplerError(Kind::Protocol, std::string("response is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("samples") || !j["samples"].is_array())
    throw ExternalSamplerError(Kind::Protocol, "response must be an object with a 'samples' array");
  const auto& samples = j["samples"];
  if (samples.empty()) throw ExternalSamplerError(Kind::Protocol, "response contains no samples");

  std::vector<SpinVector> out;
  out.reserve(samples.size());
  std::vector<int> spins(n);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    if (!s.is_array() || s.size() != n)
      throw ExternalSamplerError(Kind::Protocol, "sample " + std::to_string(k) + " must be an array of length " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (!s[i].is_number()) throw ExternalSamplerError(Kind::Protocol, "sample " + std::to_string(k) + " has a non-numeric entry");
      const double v = s[i].get<double>();
      if (v != 1.0 && v != -1.0)
        throw ExternalSamplerError(Kind::Validation, "sample " + std::to_string(k) + " entry " + std::to_string(i) + " is " + s[i].dump() + ", expected -1 or +1");
      spins[i] = v > 0 ? 1 : -1;
    }
    out.emplace_back(std::span<const int>(spins));
  }
  return out;
}

/// Delegates sampling to an external process speaking the JSON-lines protocol.
inline SampleResult solve_external(const IsingModel& m, const SamplerConfig& cfg) {
  using Kind = ExternalSamplerError::Kind;
  cfg.validate();
  const auto command = external_sampler_command(cfg);
  if (!command)
    throw ExternalSamplerError(Kind::Launch, std::string("no command configured; set ") + kExternalSamplerEnv);

  const auto start = detail::Clock::now();
  const std::string request = ising_request_json(m, cfg.num_samples).dump() + "\n";
  const auto proc = detail::run_process(*command, request, cfg.external_timeout);
  if (proc.exit_status != 0)
    throw ExternalSamplerError(Kind::Launch, "'" + *command + "' exited with status " + std::to_string(proc.exit_status));

  auto samples = parse_sampler_response(proc.out, m.n());
  SampleResult result;
  result.num_samples = samples.size();
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double e = energy(m, samples[k]);
    if (k == 0 || e < result.best_energy) {
      result.best_energy = e;
      result.best = std::move(samples[k]);
    }
  }
  result.sampler_time = detail::since(start);
  return result;
}

struct ExternalSampler {
  SamplerConfig config;
  SampleResult operator()(const IsingModel& m, std::uint64_t /*call_index*/) const { return solve_external(m, config); }
};

}  // namespace qesa
