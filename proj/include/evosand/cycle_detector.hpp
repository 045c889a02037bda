#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

namespace evosand {

// Exact recurrence detection over serialized states. Keys are full state
// encodings, so a hit is a genuine repeat and never a hash collision. Once
// either bound is reached no further states are recorded; lookups against the
// states already held continue.
class CycleDetector {
 public:
  CycleDetector(std::size_t max_states, std::size_t max_bytes)
      : max_states_(max_states), max_bytes_(max_bytes) {}

  // Returns the time the state was first seen, or records it at `t`.
  std::optional<std::uint64_t> observe(std::string key, std::uint64_t t) {
    if (auto it = seen_.find(key); it != seen_.end()) return it->second;
    if (full()) {
      saturated_ = true;
      return std::nullopt;
    }
    bytes_ += key.size() + kPerEntryOverhead;
    seen_.emplace(std::move(key), t);
    return std::nullopt;
  }

  bool full() const noexcept { return seen_.size() >= max_states_ || bytes_ >= max_bytes_; }
  bool saturated() const noexcept { return saturated_; }
  std::size_t size() const noexcept { return seen_.size(); }
  std::size_t bytes() const noexcept { return bytes_; }

  void clear() {
    seen_.clear();
    bytes_ = 0;
    saturated_ = false;
  }

 private:
  static constexpr std::size_t kPerEntryOverhead = 64;
  std::size_t max_states_;
  std::size_t max_bytes_;
  std::size_t bytes_ = 0;
  bool saturated_ = false;
  std::unordered_map<std::string, std::uint64_t> seen_;
};

// Appends v as an unsigned LEB128 varint.
inline void append_varint(std::string& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<char>((v & 0x7f) | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<char>(v));
}

}  // namespace evosand
