#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "singhom/mesh.hpp"

namespace singhom {

// Shortest round-trip-safe text for doubles: 17 significant digits.
std::string format_double(double x);

// Writes `content` to a temporary file next to `path`, then renames it into
// place. Parent directories are created.
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// "node,x,y,class,value" rows in node order.
std::string field_csv(const FieldFunction& u);
// Same layout with several value columns.
std::string fields_csv(const std::vector<std::string>& names, const std::vector<FieldFunction>& fields);

// Nodal data file. Either one value per line in node order, or rows whose
// first column is the node index and last column the value (a header line
// starting with a non-numeric token is skipped). Every node must be given.
FieldFunction read_nodal_csv(const std::filesystem::path& path, const MeshPtr& mesh);

// Plain CSV table with a header row.
std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

}  // namespace singhom
