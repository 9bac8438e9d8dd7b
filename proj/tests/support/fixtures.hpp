#pragma once

#include <filesystem>
#include <stdexcept>
#include <random>
#include <string>
#include <vector>

#include "catkb/core.hpp"
#include "catkb/dataset.hpp"
#include "catkb/io.hpp"
#include "catkb/text.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

namespace catkb::testing {

/// Span over the first occurrence of `needle` in `text`.
inline InstanceSpan span_of(std::string_view text, std::string_view needle) {
  const std::size_t byte = text.find(needle);
  if (byte == std::string_view::npos) throw std::invalid_argument("needle not in text");
  const std::size_t start = text::utf8_length(text.substr(0, byte));
  return make_span(text, start, start + text::utf8_length(needle));
}

inline EventRecord event(const std::string& id, const std::string& text,
                         const std::vector<std::string>& instances, Split split = Split::train) {
  EventRecord e{EventId(id), text, {}, split};
  for (const auto& i : instances) e.spans.push_back(span_of(text, i));
  return e;
}

inline ConceptualizationRef ref(const EventRecord& e, const std::string& instance,
                                const std::string& concept_text) {
  return ConceptualizationRef{e.id, span_of(e.text, instance), Concept(concept_text)};
}

inline Conceptualization conceptualization(const EventRecord& e, const std::string& instance,
                                           const std::string& concept_text,
                                           std::optional<Label> label,
                                           Split split = Split::train) {
  return Conceptualization{ref(e, instance, concept_text), label, split};
}

inline AbstractTriple triple(const ConceptualizationRef& head, Relation r, const std::string& tail,
                             std::optional<Label> label, Split split = Split::train) {
  return AbstractTriple{head, r, tail, label, split};
}

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("catkb-" + tag + "-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& content) const {
    io::write_file_atomic(path_ / name, content);
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

/// A loopback port that nothing listens on.
inline int unused_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  socklen_t len = sizeof addr;
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    ::close(fd);
    throw std::runtime_error("bind() failed");
  }
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace catkb::testing
