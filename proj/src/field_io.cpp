#include "singhom/field_io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <unistd.h>

namespace singhom {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    os.flush();
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string fields_csv(const std::vector<std::string>& names, const std::vector<FieldFunction>& fields) {
  if (names.size() != fields.size() || fields.empty()) throw std::invalid_argument("fields_csv: need matching names");
  const Mesh& mesh = *fields[0].mesh;
  for (const auto& f : fields)
    if (f.size() != mesh.num_nodes()) throw std::invalid_argument("fields_csv: field sizes differ");
  std::string out = "node,x,y,class";
  for (const auto& n : names) out += "," + n;
  out += '\n';
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    const Point& p = mesh.node(i);
    out += std::to_string(i) + ',' + format_double(p.x) + ',' + format_double(p.y) + ',' + to_string(mesh.node_class(i));
    for (const auto& f : fields) out += ',' + format_double(f[i]);
    out += '\n';
  }
  return out;
}

std::string field_csv(const FieldFunction& u) { return fields_csv({"value"}, {u}); }

namespace {

bool parse_double(std::string_view s, double& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

FieldFunction read_nodal_csv(const std::filesystem::path& path, const MeshPtr& mesh) {
  std::istringstream is(read_text(path));
  std::vector<double> values(mesh->num_nodes(), 0.0);
  std::vector<bool> seen(mesh->num_nodes(), false);
  std::string line;
  std::size_t lineno = 0;
  std::size_t next = 0;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    std::vector<std::string_view> cols;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
      cols.push_back(rest.substr(0, pos));
    cols.push_back(rest);
    double first = 0.0;
    if (!parse_double(cols[0], first)) {
      if (lineno == 1) continue;  // header
      fail("not a number: '" + std::string(cols[0]) + "'");
    }
    std::size_t node = next;
    double value = first;
    if (cols.size() > 1) {
      if (first < 0 || first != static_cast<double>(static_cast<std::size_t>(first))) fail("bad node index");
      node = static_cast<std::size_t>(first);
      if (!parse_double(cols.back(), value)) fail("not a number: '" + std::string(cols.back()) + "'");
    }
    if (node >= values.size()) fail("node index " + std::to_string(node) + " out of range");
    if (seen[node]) fail("node " + std::to_string(node) + " given twice");
    values[node] = value;
    seen[node] = true;
    next = node + 1;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw std::invalid_argument(path.string() + ": no value for node " + std::to_string(i));
  return FieldFunction(mesh, std::move(values));
}

std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t k = 0; k < header.size(); ++k) out += (k ? "," : "") + header[k];
  out += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw std::invalid_argument("table_csv: row width differs from header");
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + format_double(row[k]);
    out += '\n';
  }
  return out;
}

}  // namespace singhom
