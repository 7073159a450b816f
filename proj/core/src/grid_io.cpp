#include "liftsim/grid_io.hpp"

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace liftsim {

namespace {

constexpr char kMagic[4] = {'G', 'R', 'D', 'S'};
constexpr std::uint8_t kFormatVersion = 1;
constexpr std::string_view kCsvHeader = "replicate,row,col,value";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& reason) {
  throw std::runtime_error(path.string() + ": " + reason);
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(path, "read failed");
  return data;
}

void write_all(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) fail(path, "write failed");
}

void save_binary(const GridStack& stack, const std::filesystem::path& path) {
  if (stack.m > std::numeric_limits<std::uint32_t>::max())
    fail(path, "replicate count exceeds format limit");
  std::string out;
  out.reserve(37 + stack.values.size() * 8);
  out.append(kMagic, 4);
  out.push_back(static_cast<char>(kFormatVersion));
  put_u32(out, stack.grid.nx);
  put_u32(out, stack.grid.ny);
  put_u32(out, static_cast<std::uint32_t>(stack.m));
  put_f64(out, stack.grid.x0);
  put_f64(out, stack.grid.y0);
  put_f64(out, stack.grid.dx);
  put_f64(out, stack.grid.dy);
  for (double v : stack.values) put_f64(out, v);
  write_all(path, out);
}

GridStack load_binary(const std::filesystem::path& path) {
  const std::string data = read_all(path);
  if (data.size() < 49) fail(path, "malformed header: file too short");
  const auto* p = reinterpret_cast<const unsigned char*>(data.data());
  if (std::memcmp(p, kMagic, 4) != 0) fail(path, "malformed header: bad magic");
  if (p[4] != kFormatVersion) fail(path, "unsupported format version");
  GridStack stack;
  stack.grid.nx = get_u32(p + 5);
  stack.grid.ny = get_u32(p + 9);
  stack.m = get_u32(p + 13);
  stack.grid.x0 = get_f64(p + 17);
  stack.grid.y0 = get_f64(p + 25);
  stack.grid.dx = get_f64(p + 33);
  stack.grid.dy = get_f64(p + 41);
  const std::size_t count = stack.m * stack.grid.cells();
  if (data.size() != 49 + count * 8) fail(path, "value count mismatch");
  stack.values.resize(count);
  const unsigned char* q = p + 49;
  for (std::size_t i = 0; i < count; ++i, q += 8) {
    const double v = get_f64(q);
    if (std::isinf(v)) fail(path, "non-finite value without missing flag");
    stack.values[i] = v;
  }
  return stack;
}

void save_csv(const GridStack& stack, const std::filesystem::path& path) {
  std::string out;
  out.reserve(stack.values.size() * 24 + 32);
  out.append(kCsvHeader);
  out.push_back('\n');
  char line[96];
  const std::uint32_t nx = stack.grid.nx;
  for (std::size_t j = 0; j < stack.m; ++j) {
    const double* rep = stack.values.data() + j * stack.grid.cells();
    for (std::uint32_t r = 0; r < stack.grid.ny; ++r) {
      for (std::uint32_t c = 0; c < nx; ++c) {
        const int n = std::snprintf(line, sizeof(line), "%zu,%u,%u,%.17g\n", j, r, c,
                                    rep[std::size_t(r) * nx + c]);
        out.append(line, static_cast<std::size_t>(n));
      }
    }
  }
  write_all(path, out);
}

GridStack load_csv(const std::filesystem::path& path) {
  const std::string data = read_all(path);
  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= data.size()) return false;
    std::size_t end = data.find('\n', pos);
    if (end == std::string::npos) end = data.size();
    line = std::string_view(data).substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    return true;
  };

  std::string_view header;
  if (!next_line(header) || header != kCsvHeader) fail(path, "malformed header");

  struct Entry {
    std::size_t rep, row, col;
    double value;
  };
  std::vector<Entry> entries;
  std::size_t max_rep = 0, max_row = 0, max_col = 0;
  std::string_view line;
  std::size_t line_no = 1;
  while (next_line(line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string buf(line);
    const char* s = buf.c_str();
    char* end = nullptr;
    errno = 0;
    Entry e;
    e.rep = std::strtoull(s, &end, 10);
    if (end == s || *end != ',') fail(path, "bad row at line " + std::to_string(line_no));
    s = end + 1;
    e.row = std::strtoull(s, &end, 10);
    if (end == s || *end != ',') fail(path, "bad row at line " + std::to_string(line_no));
    s = end + 1;
    e.col = std::strtoull(s, &end, 10);
    if (end == s || *end != ',') fail(path, "bad row at line " + std::to_string(line_no));
    s = end + 1;
    e.value = std::strtod(s, &end);
    if (end == s || *end != '\0' || errno == ERANGE)
      fail(path, "bad value at line " + std::to_string(line_no));
    if (std::isinf(e.value)) fail(path, "non-finite value without missing flag");
    max_rep = std::max(max_rep, e.rep);
    max_row = std::max(max_row, e.row);
    max_col = std::max(max_col, e.col);
    entries.push_back(e);
  }
  if (entries.empty()) fail(path, "no data rows");
  if (max_row >= std::numeric_limits<std::uint32_t>::max() ||
      max_col >= std::numeric_limits<std::uint32_t>::max())
    fail(path, "grid indices exceed format limit");

  GridStack stack;
  stack.grid.nx = static_cast<std::uint32_t>(max_col + 1);
  stack.grid.ny = static_cast<std::uint32_t>(max_row + 1);
  stack.m = max_rep + 1;
  const std::size_t cells = stack.grid.cells();
  if (entries.size() != stack.m * cells) fail(path, "value count mismatch");
  stack.values.assign(stack.m * cells, 0.0);
  std::vector<bool> seen(stack.m * cells, false);
  for (const Entry& e : entries) {
    const std::size_t idx = e.rep * cells + e.row * stack.grid.nx + e.col;
    if (seen[idx]) fail(path, "duplicate cell entry");
    seen[idx] = true;
    stack.values[idx] = e.value;
  }
  return stack;
}

}  // namespace

FileFormat parse_file_format(std::string_view name) {
  if (name == "binary") return FileFormat::binary;
  if (name == "csv-long") return FileFormat::csv_long;
  throw std::invalid_argument("unknown file format: " + std::string(name));
}

std::string_view file_format_name(FileFormat format) {
  return format == FileFormat::binary ? "binary" : "csv-long";
}

void save_grid_stack(const GridStack& stack, const std::filesystem::path& path,
                     FileFormat format) {
  if (stack.values.size() != stack.m * stack.grid.cells())
    throw std::invalid_argument("save_grid_stack: value count does not match grid");
  if (format == FileFormat::binary)
    save_binary(stack, path);
  else
    save_csv(stack, path);
}

GridStack load_grid_stack(const std::filesystem::path& path, FileFormat format) {
  return format == FileFormat::binary ? load_binary(path) : load_csv(path);
}

}  // namespace liftsim
