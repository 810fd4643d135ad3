#pragma once

// Strict JSON object reading: every problem is appended to a violation list
// instead of throwing, and keys nobody asked for are reported as unknown.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

namespace tmaf::detail {

using Json = nlohmann::json;

class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string path, std::vector<std::string>& violations)
      : obj_(obj), path_(std::move(path)), violations_(violations) {
    if (!obj_.is_object()) {
      violations_.push_back(path_ + ": expected an object");
      valid_ = false;
    }
  }

  bool valid() const { return valid_; }
  const std::string& path() const { return path_; }
  std::string key_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const Json* find(const std::string& key) {
    if (!valid_) return nullptr;
    seen_.insert(key);
    auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <typename T>
  std::optional<T> get(const std::string& key) {
    const Json* v = find(key);
    if (v == nullptr) return std::nullopt;
    return convert<T>(*v, key_path(key));
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    auto v = get<T>(key);
    return v ? *v : fallback;
  }

  template <typename T>
  std::optional<T> require(const std::string& key) {
    const Json* v = find(key);
    if (v == nullptr) {
      if (valid_) violations_.push_back(key_path(key) + ": required key missing");
      return std::nullopt;
    }
    return convert<T>(*v, key_path(key));
  }

  /// Reports keys present in the object that were never looked up.
  void finish() {
    if (!valid_) return;
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) violations_.push_back(key_path(it.key()) + ": unknown key");
    }
  }

  template <typename T>
  std::optional<T> convert(const Json& v, const std::string& where) {
    if constexpr (std::is_same_v<T, bool>) {
      if (v.is_boolean()) return v.get<bool>();
      violations_.push_back(where + ": expected a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (v.is_string()) return v.get<std::string>();
      violations_.push_back(where + ": expected a string");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (v.is_number()) return v.get<T>();
      violations_.push_back(where + ": expected a number");
    } else if constexpr (std::is_integral_v<T>) {
      if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        return v.get<T>();
      }
      violations_.push_back(where + ": expected a non-negative integer");
    } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
      if (v.is_array()) {
        std::vector<std::size_t> out;
        bool ok = true;
        for (const auto& e : v) {
          if (e.is_number_unsigned() || (e.is_number_integer() && e.get<std::int64_t>() >= 0)) {
            out.push_back(e.get<std::size_t>());
          } else {
            ok = false;
          }
        }
        if (ok) return out;
      }
      violations_.push_back(where + ": expected an array of non-negative integers");
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (v.is_array()) {
        std::vector<double> out;
        bool ok = true;
        for (const auto& e : v) {
          if (e.is_number()) {
            out.push_back(e.get<double>());
          } else {
            ok = false;
          }
        }
        if (ok) return out;
      }
      violations_.push_back(where + ": expected an array of numbers");
    } else {
      static_assert(sizeof(T) == 0, "unsupported type");
    }
    return std::nullopt;
  }

 private:
  const Json& obj_;
  std::string path_;
  std::vector<std::string>& violations_;
  std::set<std::string> seen_;
  bool valid_ = true;
};

}  // namespace tmaf::detail
