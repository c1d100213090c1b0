#pragma once

#include "gtrans/common.hpp"
#include "gtrans/graphon.hpp"

#include <optional>
#include <string>

namespace gtrans {

/// Dense CSV: one row per line, comma separated, no header, 17 significant digits.
void write_matrix_csv(const std::string& path, const Matrix& m);
Matrix read_matrix_csv(const std::string& path);

struct EdgeListLoad {
  AdjMatrix adjacency;
  int self_loops_dropped = 0;
  int duplicates_dropped = 0;
};

/// Two whitespace-separated 0-based ids per line; '#' and '%' start comments.
/// Node count is max id + 1 unless `nodes` is given. Undirected, deduplicated.
EdgeListLoad load_edge_list(const std::string& path, std::optional<Index> nodes = std::nullopt);

/// Writes each edge once as "i j" with i < j.
void save_edge_list(const std::string& path, const AdjMatrix& a);

/// %.17g
std::string format_double(double x);

}  // namespace gtrans
