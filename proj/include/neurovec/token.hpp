#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

#include "neurovec/error.hpp"

namespace neurovec {

/// ASCII unit separator. Placed between feature name and value so that
/// ("x1", "23") and ("x12", "3") never produce the same key.
inline constexpr char kDefaultSeparator = '\x1f';

/// Canonical key for one <feature name, value> pair; the unit of indexing.
class Token {
public:
  Token() = default;

  const std::string& key() const noexcept { return key_; }
  std::string_view feature() const noexcept {
    return std::string_view(key_).substr(0, split_);
  }
  std::string_view value() const noexcept {
    return std::string_view(key_).substr(split_ + 1);
  }
  char separator() const noexcept { return key_.empty() ? kDefaultSeparator : key_[split_]; }

  friend bool operator==(const Token& a, const Token& b) noexcept { return a.key_ == b.key_; }
  friend auto operator<=>(const Token& a, const Token& b) noexcept { return a.key_ <=> b.key_; }

  friend Token make_token(std::string_view feature, std::string_view value, char separator);
  friend Token token_from_key(std::string key, char separator);

private:
  Token(std::string key, std::size_t split) : key_(std::move(key)), split_(split) {}

  std::string key_;
  std::size_t split_ = 0;
};

/// Builds `feature + separator + value`. Both parts must be free of the separator.
inline Token make_token(std::string_view feature, std::string_view value,
                        char separator = kDefaultSeparator) {
  if (feature.empty()) {
    throw TokenError("feature name is empty");
  }
  if (feature.find(separator) != std::string_view::npos) {
    throw TokenError("feature name '" + std::string(feature) +
                     "' contains the reserved token separator");
  }
  if (value.find(separator) != std::string_view::npos) {
    throw TokenError("value of feature '" + std::string(feature) +
                     "' contains the reserved token separator");
  }
  std::string key;
  key.reserve(feature.size() + 1 + value.size());
  key.append(feature);
  key.push_back(separator);
  key.append(value);
  return Token(std::move(key), feature.size());
}

/// Re-creates a token from a stored key (model files). The key must contain
/// exactly one separator with a non-empty feature part.
inline Token token_from_key(std::string key, char separator = kDefaultSeparator) {
  const auto pos = key.find(separator);
  if (pos == std::string::npos || pos == 0 ||
      key.find(separator, pos + 1) != std::string::npos) {
    throw TokenError("malformed token key");
  }
  return Token(std::move(key), pos);
}

}  // namespace neurovec

template <>
struct std::hash<neurovec::Token> {
  std::size_t operator()(const neurovec::Token& t) const noexcept {
    return std::hash<std::string>{}(t.key());
  }
};
