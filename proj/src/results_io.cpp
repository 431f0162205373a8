#include "tunnelsim/results_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <unistd.h>

#include "tunnelsim/error.hpp"

namespace tunnelsim {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view s, std::size_t line, std::string_view column) {
  s = trim(s);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw SchemaError("line " + std::to_string(line) + ": column " + std::string(column) +
                      " is not a number: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

void sort_rows(std::vector<TransmissionResult>& rows) {
  std::ranges::stable_sort(rows, [](const TransmissionResult& a, const TransmissionResult& b) {
    if (!(a.point == b.point)) return a.point < b.point;
    if (a.source != b.source) return a.source == Source::kGpe;
    return a.realization < b.realization;
  });
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_results_csv(const std::vector<TransmissionResult>& rows) {
  std::string out(kResultHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += format_double(r.point.a_s_a0) + ',' + format_double(r.point.V0_over_E) + ',' +
           format_double(r.point.sigma_b_lz) + ',' + std::string(to_string(r.source)) + ',' +
           std::to_string(r.realization) + ',' + format_double(r.T) + ',' + format_double(r.n_t) +
           ',' + format_double(r.n_r) + ',' + format_double(r.n_lost) + ',' +
           format_double(r.t_end) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<TransmissionResult> parse_results_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto l : split(text, '\n')) {
    l = trim(l);
    if (!l.empty()) lines.push_back(l);
  }
  if (lines.empty()) throw SchemaError("result table is empty");

  const auto header = split(lines[0], ',');
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[std::string(trim(header[i]))] = i;
  const auto required = split(kResultHeader, ',');
  std::string missing;
  for (auto col : required) {
    if (!index.contains(col)) missing += (missing.empty() ? "" : ", ") + std::string(col);
  }
  if (!missing.empty()) throw SchemaError("result table is missing columns: " + missing);
  if (lines.size() < 2) throw SchemaError("result table has no rows");

  std::vector<TransmissionResult> rows;
  rows.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto f = split(lines[li], ',');
    if (f.size() < header.size()) {
      throw SchemaError("line " + std::to_string(li + 1) + ": expected " +
                        std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
    }
    auto num = [&](std::string_view col) { return parse_number(f[index.find(col)->second], li + 1, col); };
    TransmissionResult r;
    r.point = {num("a_s_a0"), num("V0_over_E"), num("sigma_b_lz")};
    r.source = parse_source(trim(f[index.find("source")->second]));
    r.realization = static_cast<int>(num("realization"));
    r.T = num("T");
    r.n_t = num("N_T");
    r.n_r = num("N_R");
    r.n_lost = num("N_lost");
    r.t_end = num("t_end");
    r.seed = static_cast<std::int64_t>(num("seed"));
    rows.push_back(r);
  }
  return rows;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<TransmissionResult> read_results_csv(const std::filesystem::path& path) {
  return parse_results_csv(read_file(path));
}

void write_results_csv(const std::filesystem::path& path, std::vector<TransmissionResult> rows) {
  sort_rows(rows);
  write_atomic(path, format_results_csv(rows));
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::uint64_t fnv1a(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace tunnelsim
