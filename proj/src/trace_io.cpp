#include "zovr/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>
#include <vector>

namespace zovr {

namespace {

constexpr char kHeader[] = "epoch,iter,szo_count,f_value,grad_norm_sq,flag";

double parse_double(std::string_view s, int line) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ParseError("bad numeric field '" + std::string(s) + "'", line);
  return v;
}

long long parse_int(std::string_view s, int line) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
    throw ParseError("bad integer field '" + std::string(s) + "'", line);
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_trace_csv(const Trace& t, std::ostream& os) {
  os << kHeader << '\n';
  for (std::size_t r = 0; r < t.records.size(); ++r) {
    const TraceRecord& rec = t.records[r];
    const bool flag = t.truncated && r + 1 == t.records.size();
    os << rec.epoch << ',' << rec.iter << ',' << rec.szo << ',' << format_double(rec.f)
       << ',';
    if (rec.grad_sq) os << format_double(*rec.grad_sq);
    os << ',' << (flag ? 1 : 0) << '\n';
  }
}

void write_trace_csv(const Trace& t, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_trace_csv(t, os);
  os.flush();
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

Trace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  Trace t;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      throw ParseError("CRLF line ending; traces are LF-only", lineno);
    if (lineno == 1) {
      if (line != kHeader) throw ParseError("unexpected trace header '" + line + "'", lineno);
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw ParseError("expected 6 fields, got " + std::to_string(f.size()), lineno);
    TraceRecord rec;
    rec.epoch = static_cast<int>(parse_int(f[0], lineno));
    rec.iter = parse_int(f[1], lineno);
    rec.szo = static_cast<std::uint64_t>(parse_int(f[2], lineno));
    rec.f = parse_double(f[3], lineno);
    if (!f[4].empty()) rec.grad_sq = parse_double(f[4], lineno);
    if (parse_int(f[5], lineno) != 0) t.truncated = true;
    t.records.push_back(rec);
  }
  return t;
}

}  // namespace zovr
