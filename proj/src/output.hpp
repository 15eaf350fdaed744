#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace pzb::cli {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// write to a sibling temp file, then rename over the target
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

class csv_writer {
 public:
  explicit csv_writer(const std::vector<std::string>& header) { row_strings(header); }

  template <class... T>
  void row(const T&... cells) {
    bool first = true;
    ((ss_ << (first ? "" : ",") << cell(cells), first = false), ...);
    ss_ << '\n';
  }
  void save(const std::string& path) const { write_atomic(path, ss_.str()); }
  std::string str() const { return ss_.str(); }

 private:
  void row_strings(const std::vector<std::string>& v) {
    for (size_t i = 0; i < v.size(); ++i) ss_ << (i ? "," : "") << v[i];
    ss_ << '\n';
  }
  static std::string cell(double v) { return fmt17(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }

  std::ostringstream ss_;
};

}  // namespace pzb::cli
