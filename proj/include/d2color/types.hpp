#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace d2c {

/// Identity carried in protocol messages. Only required to be unique within
/// every closed 2-neighbourhood. -1 is reserved as a wildcard destination.
using Identity = std::int64_t;

/// A colour (equivalently a TDMA slot). -1 is the fictitious colour of the
/// root's virtual parent.
using Color = std::int64_t;

/// Global round counter. Starts at -1, first step makes it 0.
using Clock = std::int64_t;

inline constexpr Color kNoColor = -1;
inline constexpr Identity kWildcard = -1;

/// Positional subscript of a process, 1-based. Used by the engine and the
/// verifier; never appears in a message payload.
struct ProcessIndex {
  std::uint32_t value = 0;

  constexpr ProcessIndex() = default;
  constexpr explicit ProcessIndex(std::uint32_t v) : value(v) {}
  constexpr auto operator<=>(const ProcessIndex&) const = default;

  std::string str() const { return std::to_string(value); }
};

/// Dense storage addressed by ProcessIndex.
template <typename T>
class PerProcess {
 public:
  PerProcess() = default;
  explicit PerProcess(std::size_t n, const T& init = T{}) : data_(n, init) {}

  T& operator[](ProcessIndex i) { return data_[i.value - 1]; }
  const T& operator[](ProcessIndex i) const { return data_[i.value - 1]; }

  std::size_t size() const { return data_.size(); }
  void push_back(const T& v) { data_.push_back(v); }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  const std::vector<T>& raw() const { return data_; }
  std::vector<T>& raw() { return data_; }

  bool operator==(const PerProcess&) const = default;

 private:
  std::vector<T> data_;
};

/// All indices 1..n in ascending order.
inline std::vector<ProcessIndex> all_processes(std::size_t n) {
  std::vector<ProcessIndex> out;
  out.reserve(n);
  for (std::uint32_t i = 1; i <= n; ++i) out.emplace_back(i);
  return out;
}

}  // namespace d2c

template <>
struct std::hash<d2c::ProcessIndex> {
  std::size_t operator()(const d2c::ProcessIndex& p) const noexcept { return p.value; }
};
