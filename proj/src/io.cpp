#include "gtrans/io.hpp"

#include "gtrans/log.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>
#include <vector>

namespace gtrans {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Input, "cannot open '" + path + "' for writing");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  require(static_cast<bool>(out), ErrorKind::Input, "failed writing '" + path + "'");
}

Matrix read_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Input, "cannot read '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\r' || *end == '\t')) ++end;
      require(end != cell.c_str() && end && *end == '\0' && errno == 0, ErrorKind::Input,
              path + ":" + std::to_string(line_no) + ": not a number: '" + cell + "'");
      row.push_back(v);
    }
    require(rows.empty() || row.size() == rows.front().size(), ErrorKind::Input,
            path + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorKind::EmptyInput, "'" + path + "' holds no matrix");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

namespace {

Index parse_node_id(const std::string& token, const std::string& where) {
  require(!token.empty() && token.find_first_not_of("0123456789") == std::string::npos,
          ErrorKind::Input, where + ": invalid node id '" + token + "'");
  errno = 0;
  const unsigned long long v = std::strtoull(token.c_str(), nullptr, 10);
  require(errno == 0 && v < (1ULL << 31), ErrorKind::Input,
          where + ": node id out of range '" + token + "'");
  return static_cast<Index>(v);
}

}  // namespace

EdgeListLoad load_edge_list(const std::string& path, std::optional<Index> nodes) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::Input, "cannot read edge list '" + path + "'");

  EdgeListLoad out;
  std::vector<std::pair<Index, Index>> edges;
  Index max_id = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#%");
    if (hash != std::string::npos) line.erase(hash);
    std::stringstream ss(line);
    std::string a, b, extra;
    if (!(ss >> a)) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    require(static_cast<bool>(ss >> b), ErrorKind::Input, where + ": expected two node ids");
    require(!(ss >> extra), ErrorKind::Input, where + ": trailing token '" + extra + "'");
    const Index u = parse_node_id(a, where);
    const Index v = parse_node_id(b, where);
    if (nodes) {
      require(u < *nodes && v < *nodes, ErrorKind::Input,
              where + ": node id exceeds --nodes " + std::to_string(*nodes));
    }
    max_id = std::max({max_id, u, v});
    if (u == v) {
      ++out.self_loops_dropped;
      continue;
    }
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  require(!edges.empty() || out.self_loops_dropped > 0, ErrorKind::EmptyInput,
          "edge list '" + path + "' is empty");

  const Index n = nodes ? *nodes : max_id + 1;
  out.adjacency = AdjMatrix(n);
  std::set<std::pair<Index, Index>> seen;
  for (const auto& e : edges) {
    if (!seen.insert(e).second) {
      ++out.duplicates_dropped;
      continue;
    }
    out.adjacency.set_edge(e.first, e.second, true);
  }
  if (out.self_loops_dropped > 0) {
    log_warn(path + ": dropped " + std::to_string(out.self_loops_dropped) + " self-loop(s)");
  }
  return out;
}

void save_edge_list(const std::string& path, const AdjMatrix& a) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::Input, "cannot open '" + path + "' for writing");
  for (Index i = 0; i < a.size(); ++i) {
    for (Index j = i + 1; j < a.size(); ++j) {
      if (a.edge(i, j)) out << i << ' ' << j << '\n';
    }
  }
}

}  // namespace gtrans
