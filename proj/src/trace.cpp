#include "svm/trace.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

#include "svm/error.hpp"

namespace svm {

const std::vector<TraceKind>& trace_schema() {
  static const std::vector<TraceKind> schema = {
      {"spawn", {"tid", "parent"}},
      {"dispatch", {"tid"}},
      {"block", {"tid", "entries"}},
      {"rendezvous", {"ch", "sender", "receiver", "msg"}},
      {"wrap", {"tid", "entry"}},
      {"drv_write", {"drv", "ch", "val"}},
      {"drv_read", {"drv", "ch", "val"}},
      {"post", {"drv", "kind", "val"}},
      {"latch", {"drv", "val"}},
      {"drop", {"drv", "val", "where"}},
      {"sleep", {"steps"}},
      {"wake", {"steps"}},
      {"finish", {"tid"}},
      {"gc", {"marked", "free", "mark_steps"}},
      {"deadlock", {"tid", "ch"}},
      {"halt", {"reason", "steps"}},
  };
  return schema;
}

namespace {

const TraceKind* find_kind(std::string_view name) {
  const auto& s = trace_schema();
  auto it = std::find_if(s.begin(), s.end(), [name](const TraceKind& k) { return k.name == name; });
  return it == s.end() ? nullptr : &*it;
}

bool clean_token(std::string_view v) {
  return !v.empty() && v.find_first_of(" =\t\n") == std::string_view::npos;
}

}  // namespace

std::string TraceRecord::format() const {
  std::string out = "t=" + std::to_string(time_ms) + " ev=" + kind;
  for (const auto& [k, v] : fields) {
    out += ' ';
    out += k;
    out += '=';
    out += v;
  }
  return out;
}

std::string_view TraceRecord::get(std::string_view key) const {
  for (const auto& [k, v] : fields)
    if (k == key) return v;
  return {};
}

TraceRecord parse_trace_line(std::string_view line) {
  std::vector<std::pair<std::string_view, std::string_view>> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    std::size_t end = line.find(' ', pos);
    if (end == std::string_view::npos) end = line.size();
    std::string_view tok = line.substr(pos, end - pos);
    auto eq = tok.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == tok.size())
      throw Error(ErrorCode::ParseError, "malformed token '" + std::string(tok) + "'");
    tokens.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    pos = end + 1;
  }
  if (tokens.size() < 2 || tokens[0].first != "t" || tokens[1].first != "ev")
    throw Error(ErrorCode::ParseError, "record must start with t= and ev=");

  TraceRecord rec;
  auto [p, ec] = std::from_chars(tokens[0].second.data(), tokens[0].second.data() + tokens[0].second.size(), rec.time_ms);
  if (ec != std::errc{} || p != tokens[0].second.data() + tokens[0].second.size())
    throw Error(ErrorCode::ParseError, "bad time '" + std::string(tokens[0].second) + "'");
  rec.kind = tokens[1].second;
  const TraceKind* kind = find_kind(rec.kind);
  if (!kind) throw Error(ErrorCode::ParseError, "unknown record kind '" + rec.kind + "'");
  if (tokens.size() - 2 != kind->fields.size())
    throw Error(ErrorCode::ParseError, "record '" + rec.kind + "' has wrong field count");
  for (std::size_t i = 0; i < kind->fields.size(); ++i) {
    const auto& [k, v] = tokens[i + 2];
    if (k != kind->fields[i])
      throw Error(ErrorCode::ParseError, "unexpected field '" + std::string(k) + "' in '" + rec.kind + "'");
    rec.fields.emplace_back(std::string(k), std::string(v));
  }
  return rec;
}

void Trace::emit(std::string_view kind, std::initializer_list<std::pair<std::string_view, std::string>> fields) {
  if (!enabled_) return;
  const TraceKind* k = find_kind(kind);
  if (!k || k->fields.size() != fields.size()) throw std::logic_error("trace record violates schema: " + std::string(kind));
  TraceRecord rec;
  rec.time_ms = clock_ ? clock_->now() : 0;
  rec.kind = kind;
  std::size_t i = 0;
  for (const auto& [key, value] : fields) {
    if (key != k->fields[i++] || !clean_token(value))
      throw std::logic_error("trace record violates schema: " + std::string(kind) + "." + std::string(key));
    rec.fields.emplace_back(std::string(key), value);
  }
  lines_.push_back(rec.format());
}

std::string Trace::text() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace svm
