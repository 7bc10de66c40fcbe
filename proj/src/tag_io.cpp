#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>

#include "fldi/csv.hpp"
#include "fldi/detection.hpp"
#include "fldi/errors.hpp"

namespace fldi::stats {
namespace {

constexpr std::string_view kMagic = "TAGS1";

std::int64_t parse_int(const std::string& text, const char* what) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw DataError(std::string("bad ") + what + ": '" + text + "'");
  return v;
}

void put_u64_le(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b;
  for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
  out.write(b.data(), b.size());
}

// Merge in time order; signal first on ties.
template <typename Fn>
void for_each_merged(const TagStream& s, Fn fn) {
  std::size_t i = 0, j = 0;
  while (i < s.signal.size() || j < s.idler.size()) {
    if (j == s.idler.size() || (i < s.signal.size() && s.signal[i] <= s.idler[j])) {
      fn(Channel::kSignal, s.signal[i++]);
    } else {
      fn(Channel::kIdler, s.idler[j++]);
    }
  }
}

void push_tag(TagStream& s, int channel, std::int64_t t) {
  if (t < 0) throw DataError("negative timestamp");
  if (channel == 0) {
    s.signal.push_back(t);
  } else if (channel == 1) {
    s.idler.push_back(t);
  } else {
    throw DataError("unknown channel id " + std::to_string(channel));
  }
}

}  // namespace

void write_tags_binary(const TagStream& stream, std::ostream& out) {
  stream.validate();
  out << kMagic << " duration_ps=" << stream.duration_ps << " channels=2\n";
  for_each_merged(stream, [&](Channel c, std::int64_t t) {
    out.put(static_cast<char>(c));
    put_u64_le(out, static_cast<std::uint64_t>(t));
  });
  if (!out) throw DataError("failed writing tag stream");
}

TagStream read_tags_binary(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DataError("missing TAGS1 header");
  const auto fields = csv::split(header, ' ');
  if (fields.size() != 3 || fields[0] != kMagic || !fields[1].starts_with("duration_ps=") ||
      fields[2] != "channels=2") {
    throw DataError("malformed tag header: '" + header + "'");
  }
  TagStream s;
  s.duration_ps = parse_int(fields[1].substr(12), "duration");
  std::array<unsigned char, 9> rec;
  while (in.read(reinterpret_cast<char*>(rec.data()), rec.size())) {
    std::uint64_t t = 0;
    for (int k = 7; k >= 0; --k) t = (t << 8) | rec[1 + k];
    if (t > static_cast<std::uint64_t>(INT64_MAX)) throw DataError("timestamp overflow");
    push_tag(s, rec[0], static_cast<std::int64_t>(t));
  }
  if (in.gcount() != 0) throw DataError("truncated tag record");
  s.validate();
  return s;
}

void write_tags_csv(const TagStream& stream, std::ostream& out) {
  stream.validate();
  out << "channel,timestamp_ps\n";
  for_each_merged(stream, [&](Channel c, std::int64_t t) { out << static_cast<int>(c) << ',' << t << '\n'; });
}

TagStream read_tags_csv(std::istream& in, std::optional<std::int64_t> duration_ps) {
  std::string line;
  if (!std::getline(in, line) || csv::split(line) != std::vector<std::string>{"channel", "timestamp_ps"}) {
    throw DataError("expected CSV header 'channel,timestamp_ps'");
  }
  TagStream s;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split(line);
    if (f.size() != 2) throw DataError("row " + std::to_string(row) + ": expected 2 fields");
    push_tag(s, static_cast<int>(parse_int(f[0], "channel")), parse_int(f[1], "timestamp"));
  }
  std::int64_t last = 0;
  if (!s.signal.empty()) last = std::max(last, s.signal.back());
  if (!s.idler.empty()) last = std::max(last, s.idler.back());
  s.duration_ps = duration_ps.value_or(last);
  s.validate();
  return s;
}

}  // namespace fldi::stats
