#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "examini/core/error.hpp"
#include "examini/gravity/driver.hpp"
#include "examini/mhd/solver.hpp"
#include "examini/pic/types.hpp"

namespace examini::config {

using nlohmann::json;

/// Every schema violation found in one document, each prefixed by its
/// field path ("grid.cells[1]: must be positive").
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Reads fields of one JSON object into typed targets, collecting
/// violations instead of throwing. Absent keys keep the target's default.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path, std::vector<std::string>& errors);

  template <typename T>
  bool read(std::string_view key, T& out);

  /// Records a violation on `key` unless `ok`.
  void check(bool ok, std::string_view key, const std::string& message);
  bool has(std::string_view key) const;
  const json* get(std::string_view key);
  std::string path_of(std::string_view key) const;
  /// Flags keys that were never looked up.
  void finish();
  bool valid() const { return valid_; }

 private:
  const json* j_;
  std::string path_;
  std::vector<std::string>* errors_;
  std::vector<std::string> seen_;
  bool valid_ = true;
};

bool convert(const json& j, int& out);
bool convert(const json& j, std::int64_t& out);
bool convert(const json& j, std::uint64_t& out);
bool convert(const json& j, double& out);
bool convert(const json& j, bool& out);
bool convert(const json& j, std::string& out);

template <typename T, std::size_t N>
bool convert(const json& j, std::array<T, N>& out) {
  if (!j.is_array() || j.size() != N) return false;
  std::array<T, N> tmp = out;
  for (std::size_t i = 0; i < N; ++i)
    if (!convert(j[i], tmp[i])) return false;
  out = tmp;
  return true;
}

template <typename T>
bool convert(const json& j, std::vector<T>& out) {
  if (!j.is_array()) return false;
  std::vector<T> tmp(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    if (!convert(j[i], tmp[i])) return false;
  out = std::move(tmp);
  return true;
}

template <typename T>
bool ObjectReader::read(std::string_view key, T& out) {
  const json* v = get(key);
  if (!v) return false;
  if (!convert(*v, out)) {
    check(false, key, "wrong type");
    return false;
  }
  return true;
}

/// Parses a JSON file. IoFailure when unreadable, ValidationError when the
/// text is not JSON.
json load_json(const std::filesystem::path& path);
void write_json(const json& j, const std::filesystem::path& path);

/// Schema readers: defaults for absent fields, every violation reported.
/// `ranks` is the rank count the run will use and enters the cross-field
/// checks (grid divisibility and the like).
mhd::MhdConfig mhd_from_json(const json& j, int ranks);
pic::PicConfig pic_from_json(const json& j, int ranks);
gravity::GravityConfig gravity_from_json(const json& j, int ranks);

/// Full effective configuration, defaults included.
json to_json(const mhd::MhdConfig& c);
json to_json(const pic::PicConfig& c);
json to_json(const gravity::GravityConfig& c);

/// The "ranks" field of an app config (default 1); ValidationError if not a
/// positive integer.
int ranks_from_json(const json& j);

}  // namespace examini::config
