#pragma once

#include <filesystem>
#include <string>

#include "les/distances.hpp"

namespace les::analysis {
struct EmbeddingResult;
}

namespace les::io {

inline constexpr const char* kDescriptorSchema = "les-desc-v1";

enum class TableFormat { csv, json };
TableFormat table_format_from_string(const std::string& s);

/// {"schema":"les-desc-v1","name":..,"k":..,"gamma":..,"sigma_multiplier":..,
///  "metric":..,"seed":..,"method":..,"f":[..]}; numbers use shortest
/// round-trip decimal.
std::string descriptor_to_json(const distances::LesDescriptor& d);
distances::LesDescriptor descriptor_from_json(const std::string& text,
                                              const std::string& origin = "<string>");

void write_descriptor(const distances::LesDescriptor& d, const std::filesystem::path& path);
distances::LesDescriptor read_descriptor(const std::filesystem::path& path);
/// True when the file parses as JSON carrying the descriptor schema tag.
bool looks_like_descriptor(const std::filesystem::path& path);

/// CSV: header row "label,<l1>,...", then one row per label.
/// JSON: {"method":..,"labels":[..],"values":[[..],..]}.
std::string distance_matrix_to_string(const distances::DistanceMatrix& m, TableFormat format);
distances::DistanceMatrix distance_matrix_from_string(const std::string& text, TableFormat format);

/// CSV: "label,f1,...,fm"; JSON: {"labels","coords","eigvals","kernel_scale"}.
std::string embedding_to_string(const analysis::EmbeddingResult& e,
                                const std::vector<std::string>& labels, TableFormat format);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

std::string read_text(const std::filesystem::path& path);
/// Writes to a sibling temporary file, then renames over `path`.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace les::io
