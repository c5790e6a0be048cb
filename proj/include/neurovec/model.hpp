#pragma once

// Model file format (UTF-8, one field per line, `key=value`):
//
//   neurovec-model
//   format_version=1
//   task=<classification|regression>
//   separator=<decimal byte value of the token separator>
//   quantize=<none|decimals>
//   missing=<reject|skip>
//   alpha=<real>
//   tolerance=<real>
//   fallback=<majority|mean|error>
//   fallback_value=<escaped target, empty when absent>
//   target=<escaped column name>
//   columns=<count>
//   column=<numeric|categorical> <escaped name>        (one line per column)
//   records=<count>
//   nv id=<n> target=<t> use=<n> success=<n> abs_error=<real> source=<n|-> tokens=<k1> <k2> ...
//   checksum=fnv1a64:<16 lowercase hex digits>
//
// Reals use shortest round-trip decimal form. Escaping is percent-encoding
// (%XX, uppercase hex) of '%', '=', space and every byte below 0x20 or equal
// to 0x7F. The checksum covers every byte before the checksum line. Records
// appear in id order and tokens in the order they were indexed. The inverted
// index is not stored; load() rebuilds it from the token lists.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "neurovec/dataset.hpp"
#include "neurovec/error.hpp"
#include "neurovec/store.hpp"
#include "neurovec/token.hpp"
#include "neurovec/value.hpp"

namespace neurovec {

inline constexpr int kModelFormatVersion = 1;

/// A trained store together with everything needed to query it.
struct Model {
  Schema schema;
  TokenizeOptions tokenize;
  EnergyParams params;
  FallbackPolicy fallback;
  NeurovectorStore store;

  std::vector<Token> tokenize_row(const Row& row) const {
    return tokenize_instance(row, schema, tokenize);
  }
};

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {

inline std::string escape_field(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    if (c == '%' || c == '=' || c == ' ' || c < 0x20 || c == 0x7F) {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    } else {
      out.push_back(static_cast<char>(c));
    }
  }
  return out;
}

inline std::optional<std::string> unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 2 >= s.size()) return std::nullopt;
    unsigned v = 0;
    const auto [p, ec] = std::from_chars(s.data() + i + 1, s.data() + i + 3, v, 16);
    if (ec != std::errc() || p != s.data() + i + 3) return std::nullopt;
    out.push_back(static_cast<char>(v));
    i += 2;
  }
  return out;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  static constexpr char kHex[] = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = kHex[v & 0xF];
    v >>= 4;
  }
  buf[16] = '\0';
  return buf;
}

class LineReader {
public:
  explicit LineReader(std::vector<std::string_view> lines) : lines_(std::move(lines)) {}

  bool done() const { return pos_ >= lines_.size(); }
  std::size_t line_number() const { return pos_ + 1; }

  [[noreturn]] void fail(const std::string& what) const {
    throw MalformedModelError("model line " + std::to_string(std::min(pos_ + 1, lines_.size())) +
                              ": " + what);
  }

  std::string_view next() {
    if (done()) fail("unexpected end of file");
    return lines_[pos_++];
  }

  /// Next line, which must read `key=...`; returns the raw value part.
  std::string_view field(std::string_view key) {
    const auto line = next();
    if (!line.starts_with(key) || line.size() <= key.size() || line[key.size()] != '=') {
      --pos_;
      fail("expected field '" + std::string(key) + "'");
    }
    return line.substr(key.size() + 1);
  }

  std::string text(std::string_view key) {
    auto v = unescape_field(field(key));
    if (!v) fail("bad escape in field '" + std::string(key) + "'");
    return *v;
  }

  template <typename Int>
  Int integer(std::string_view key) {
    const auto s = field(key);
    return parse_int<Int>(s, key);
  }

  double real(std::string_view key) { return parse_real(field(key), key); }

  template <typename Int>
  Int parse_int(std::string_view s, std::string_view key) const {
    Int v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
      fail("field '" + std::string(key) + "' is not an integer");
    }
    return v;
  }

  double parse_real(std::string_view s, std::string_view key) const {
    const auto v = parse_decimal(s);
    if (!v || trim(s).size() != s.size()) fail("field '" + std::string(key) + "' is not a number");
    return *v;
  }

private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

inline std::string render_target(const TargetValue& v) { return escape_field(format_target(v)); }

}  // namespace detail

/// Canonical text form of a model, checksum line included.
inline std::string serialize_model(const Model& m) {
  using detail::escape_field;
  std::ostringstream os;
  os << "neurovec-model\n";
  os << "format_version=" << kModelFormatVersion << '\n';
  os << "task=" << to_string(m.schema.task) << '\n';
  os << "separator=" << static_cast<int>(static_cast<unsigned char>(m.tokenize.separator)) << '\n';
  os << "quantize="
     << (m.tokenize.format.quantizeDecimals ? std::to_string(*m.tokenize.format.quantizeDecimals)
                                            : std::string("none"))
     << '\n';
  os << "missing=" << (m.tokenize.missing == MissingPolicy::kReject ? "reject" : "skip") << '\n';
  os << "alpha=" << format_shortest(m.params.alpha) << '\n';
  os << "tolerance=" << format_shortest(m.params.regressionSuccessTolerance) << '\n';
  os << "fallback=" << to_string(m.fallback.mode) << '\n';
  os << "fallback_value=" << (m.fallback.value ? detail::render_target(*m.fallback.value) : "")
     << '\n';
  os << "target=" << escape_field(m.schema.target_name()) << '\n';
  os << "columns=" << m.schema.columns.size() << '\n';
  for (const auto& c : m.schema.columns) {
    os << "column=" << to_string(c.kind) << ' ' << escape_field(c.name) << '\n';
  }
  os << "records=" << m.store.size() << '\n';
  for (const auto& r : m.store.records()) {
    os << "nv id=" << r.id << " target=" << detail::render_target(r.target) << " use=" << r.use
       << " success=" << r.success << " abs_error=" << format_shortest(r.cumAbsError)
       << " source=" << (r.sourceRow ? std::to_string(*r.sourceRow) : std::string("-"))
       << " tokens=";
    bool first = true;
    for (const auto& t : m.store.tokens_of(r.id)) {
      if (!first) os << ' ';
      os << escape_field(t.key());
      first = false;
    }
    os << '\n';
  }
  auto body = os.str();
  body += "checksum=fnv1a64:" + detail::hex64(fnv1a64(body)) + '\n';
  return body;
}

/// Inverse of serialize_model. Throws VersionMismatchError, ChecksumMismatchError
/// or MalformedModelError.
inline Model deserialize_model(std::string_view text) {
  std::vector<std::string_view> lines;
  std::vector<std::size_t> offsets;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      offsets.push_back(pos);
      lines.push_back(text.substr(pos));
      break;
    }
    offsets.push_back(pos);
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }

  detail::LineReader in(lines);
  if (in.done() || in.next() != "neurovec-model") in.fail("not a neurovec model file");
  const int version = in.integer<int>("format_version");
  if (version != kModelFormatVersion) throw VersionMismatchError(version, kModelFormatVersion);

  // The checksum line must be last and terminated; anything else means truncation.
  constexpr std::string_view kChecksumPrefix = "checksum=fnv1a64:";
  if (lines.size() < 3 || !text.ends_with('\n') || !lines.back().starts_with(kChecksumPrefix)) {
    throw MalformedModelError("missing checksum line (truncated model file?)");
  }
  const auto stated = lines.back().substr(kChecksumPrefix.size());
  const auto actual = detail::hex64(fnv1a64(text.substr(0, offsets.back())));
  if (stated != actual) {
    throw ChecksumMismatchError("model checksum mismatch: file says " + std::string(stated) +
                                ", content hashes to " + actual);
  }
  lines.pop_back();
  detail::LineReader body(lines);
  body.next();
  body.next();

  Model m;
  const auto task = parse_task(body.field("task"));
  if (!task) body.fail("unknown task");
  m.schema.task = *task;

  const auto sep = body.integer<int>("separator");
  if (sep <= 0 || sep > 127) body.fail("separator out of range");
  m.tokenize.separator = static_cast<char>(sep);
  if (const auto q = body.field("quantize"); q != "none") {
    m.tokenize.format.quantizeDecimals = body.parse_int<int>(q, "quantize");
  }
  const auto missing = body.field("missing");
  if (missing == "reject") {
    m.tokenize.missing = MissingPolicy::kReject;
  } else if (missing == "skip") {
    m.tokenize.missing = MissingPolicy::kSkipToken;
  } else {
    body.fail("unknown missing-value policy");
  }
  m.params.alpha = body.real("alpha");
  m.params.regressionSuccessTolerance = body.real("tolerance");
  try {
    m.params.validate();
  } catch (const Error& e) {
    body.fail(e.what());
  }

  auto parseTarget = [&](std::string_view raw, std::string_view key) -> TargetValue {
    auto s = detail::unescape_field(raw);
    if (!s || s->empty()) body.fail("bad value for '" + std::string(key) + "'");
    if (m.schema.task == Task::kClassification) return *s;
    return body.parse_real(*s, key);
  };

  const auto mode = parse_fallback_mode(body.field("fallback"));
  if (!mode) body.fail("unknown fallback mode");
  m.fallback.mode = *mode;
  if (const auto fv = body.field("fallback_value"); !fv.empty()) {
    m.fallback.value = parseTarget(fv, "fallback_value");
  }

  const auto targetName = body.text("target");
  const auto ncols = body.integer<std::size_t>("columns");
  if (ncols < 2 || ncols > lines.size()) body.fail("implausible column count");
  bool targetFound = false;
  for (std::size_t c = 0; c < ncols; ++c) {
    const auto v = body.field("column");
    const auto space = v.find(' ');
    if (space == std::string_view::npos) body.fail("column needs a kind and a name");
    Column col;
    const auto kind = v.substr(0, space);
    if (kind == "numeric") {
      col.kind = ColumnKind::kNumeric;
    } else if (kind == "categorical") {
      col.kind = ColumnKind::kCategorical;
    } else {
      body.fail("unknown column kind");
    }
    auto name = detail::unescape_field(v.substr(space + 1));
    if (!name) body.fail("bad escape in column name");
    col.name = std::move(*name);
    if (col.name == targetName) {
      m.schema.targetIndex = c;
      targetFound = true;
    }
    m.schema.columns.push_back(std::move(col));
  }
  if (!targetFound) body.fail("target column is not among the columns");
  try {
    m.schema.validate();
  } catch (const DataError& e) {
    body.fail(e.what());
  }

  const auto nrec = body.integer<std::size_t>("records");
  if (nrec > lines.size()) body.fail("record count exceeds file length");
  m.store = NeurovectorStore(m.schema.task);
  for (std::size_t i = 0; i < nrec; ++i) {
    const auto line = body.next();
    if (!line.starts_with("nv ")) body.fail("expected a neurovector record");
    std::vector<std::string_view> parts;
    for (std::size_t p = 3; p <= line.size();) {
      auto e = line.find(' ', p);
      if (e == std::string_view::npos) e = line.size();
      parts.push_back(line.substr(p, e - p));
      p = e + 1;
    }
    constexpr std::string_view keys[] = {"id", "target", "use", "success", "abs_error", "source", "tokens"};
    if (parts.size() < std::size(keys)) body.fail("record has too few fields");
    std::string_view vals[std::size(keys)];
    for (std::size_t k = 0; k < std::size(keys); ++k) {
      const auto& p = parts[k];
      if (!p.starts_with(keys[k]) || p.size() < keys[k].size() + 1 || p[keys[k].size()] != '=') {
        body.fail("expected record field '" + std::string(keys[k]) + "'");
      }
      vals[k] = p.substr(keys[k].size() + 1);
    }
    NeurovectorRecord rec;
    rec.id = body.parse_int<NeurovectorId>(vals[0], "id");
    if (rec.id != i) body.fail("records out of id order");
    rec.target = parseTarget(vals[1], "target");
    rec.use = body.parse_int<std::uint64_t>(vals[2], "use");
    rec.success = body.parse_int<std::uint64_t>(vals[3], "success");
    rec.cumAbsError = body.parse_real(vals[4], "abs_error");
    if (vals[5] != "-") rec.sourceRow = body.parse_int<std::size_t>(vals[5], "source");

    std::vector<Token> tokens;
    std::vector<std::string_view> raw{vals[6]};
    raw.insert(raw.end(), parts.begin() + static_cast<std::ptrdiff_t>(std::size(keys)), parts.end());
    for (auto r : raw) {
      auto key = detail::unescape_field(r);
      if (!key) body.fail("bad escape in token");
      try {
        tokens.push_back(token_from_key(std::move(*key), m.tokenize.separator));
      } catch (const TokenError& e) {
        body.fail(e.what());
      }
    }
    try {
      m.store.restore(std::move(tokens), std::move(rec));
    } catch (const StoreError& e) {
      body.fail(e.what());
    }
  }
  if (!body.done()) body.fail("unexpected content after the last record");
  return m;
}

/// Writes the model and returns its checksum as 16 lowercase hex digits.
inline std::string save_model(const Model& m, const std::filesystem::path& path) {
  const auto text = serialize_model(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ModelError("cannot write '" + path.string() + "'");
  out << text;
  out.flush();
  if (!out) throw ModelError("failed writing '" + path.string() + "'");
  const auto pos = text.rfind("fnv1a64:");
  return text.substr(pos + 8, 16);
}

inline Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace neurovec
