#pragma once

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <string>

namespace runner {

struct Output {
  int code = -1;
  std::string out;
};

// Runs a shell command, capturing stdout; stderr is discarded unless the
// command redirects it.
inline Output run(const std::string& cmd) {
  Output o;
  FILE* p = popen((cmd + " 2>/dev/null").c_str(), "r");
  if (!p) return o;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) o.out.append(buf.data(), n);
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

inline Output run_with_stderr(const std::string& cmd) {
  Output o;
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return o;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) o.out.append(buf.data(), n);
  const int status = pclose(p);
  o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return o;
}

}  // namespace runner
