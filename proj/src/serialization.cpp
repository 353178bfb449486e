#include "les/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "les/analysis.hpp"
#include "les/error.hpp"

namespace les::io {

using ojson = nlohmann::ordered_json;

TableFormat table_format_from_string(const std::string& s) {
  if (s == "csv") return TableFormat::csv;
  if (s == "json") return TableFormat::json;
  throw_config("unknown format '" + s + "' (expected csv or json)");
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_io("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw_io("write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw_io("cannot move output into place: " + path.string());
  }
}

// ---------------------------------------------------------------------------

std::string descriptor_to_json(const distances::LesDescriptor& d) {
  ojson j;
  j["schema"] = kDescriptorSchema;
  j["name"] = d.dataset_name;
  j["k"] = d.rank_k;
  j["gamma"] = d.gamma;
  j["sigma_multiplier"] = d.sigma_rule.multiplier;
  j["metric"] = d.sigma_rule.metric;
  j["seed"] = d.seed;
  j["method"] = spectral::to_string(d.method);
  ojson f = ojson::array();
  for (Index i = 0; i < d.f.size(); ++i) f.push_back(d.f[i]);
  j["f"] = std::move(f);
  return j.dump(2) + "\n";
}

distances::LesDescriptor descriptor_from_json(const std::string& text, const std::string& origin) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::exception& e) {
    throw_io(origin + ": invalid JSON: " + e.what());
  }
  try {
    if (!j.is_object() || j.value("schema", std::string()) != kDescriptorSchema)
      throw_io(origin + ": not a " + std::string(kDescriptorSchema) + " descriptor");
    distances::LesDescriptor d;
    d.dataset_name = j.at("name").get<std::string>();
    d.rank_k = j.at("k").get<Index>();
    d.gamma = j.at("gamma").get<double>();
    d.sigma_rule.multiplier = j.at("sigma_multiplier").get<double>();
    d.sigma_rule.metric = j.at("metric").get<std::string>();
    d.seed = j.at("seed").get<std::uint64_t>();
    d.method = spectral::method_from_string(j.at("method").get<std::string>());
    const auto& f = j.at("f");
    if (!f.is_array() || static_cast<Index>(f.size()) != d.rank_k)
      throw_io(origin + ": descriptor length does not match k");
    d.f.resize(d.rank_k);
    for (Index i = 0; i < d.rank_k; ++i) {
      d.f[i] = f.at(static_cast<std::size_t>(i)).get<double>();
      if (!std::isfinite(d.f[i])) throw_io(origin + ": non-finite descriptor entry");
    }
    if (!(d.gamma > 0.0)) throw_io(origin + ": gamma must be positive");
    return d;
  } catch (const ojson::exception& e) {
    throw_io(origin + ": malformed descriptor: " + e.what());
  }
}

void write_descriptor(const distances::LesDescriptor& d, const std::filesystem::path& path) {
  write_text_atomic(path, descriptor_to_json(d));
}

distances::LesDescriptor read_descriptor(const std::filesystem::path& path) {
  return descriptor_from_json(read_text(path), path.string());
}

bool looks_like_descriptor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path.string());
  char ch = 0;
  while (in.get(ch) && std::isspace(static_cast<unsigned char>(ch))) {
  }
  if (ch != '{') return false;
  const ojson j = ojson::parse(read_text(path), nullptr, false);
  return j.is_object() && j.value("schema", std::string()) == kDescriptorSchema;
}

// ---------------------------------------------------------------------------

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_number(const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw_io("cannot parse '" + s + "'");
  return v;
}

}  // namespace

std::string distance_matrix_to_string(const distances::DistanceMatrix& m, TableFormat format) {
  const Index r = m.size();
  if (format == TableFormat::json) {
    ojson j;
    j["method"] = m.method;
    j["labels"] = m.labels;
    ojson rows = ojson::array();
    for (Index i = 0; i < r; ++i) {
      ojson row = ojson::array();
      for (Index k = 0; k < r; ++k) row.push_back(m.values(i, k));
      rows.push_back(std::move(row));
    }
    j["values"] = std::move(rows);
    return j.dump(2) + "\n";
  }
  std::string out = "label";
  for (const auto& l : m.labels) out += "," + csv_field(l);
  out += "\n";
  for (Index i = 0; i < r; ++i) {
    out += csv_field(m.labels[static_cast<std::size_t>(i)]);
    for (Index k = 0; k < r; ++k) out += "," + format_double(m.values(i, k));
    out += "\n";
  }
  return out;
}

distances::DistanceMatrix distance_matrix_from_string(const std::string& text,
                                                      TableFormat format) {
  distances::DistanceMatrix m;
  if (format == TableFormat::json) {
    const ojson j = ojson::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw_io("distance matrix: invalid JSON");
    try {
      m.method = j.value("method", std::string());
      m.labels = j.at("labels").get<std::vector<std::string>>();
      const auto& rows = j.at("values");
      const auto r = static_cast<Index>(m.labels.size());
      if (static_cast<Index>(rows.size()) != r) throw_io("distance matrix: row count mismatch");
      m.values.resize(r, r);
      for (Index i = 0; i < r; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (static_cast<Index>(row.size()) != r) throw_io("distance matrix: ragged row");
        for (Index k = 0; k < r; ++k) m.values(i, k) = row.at(static_cast<std::size_t>(k));
      }
    } catch (const ojson::exception& e) {
      throw_io(std::string("distance matrix: ") + e.what());
    }
    return m;
  }
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw_io("distance matrix: empty CSV");
  auto header = split_csv_line(line);
  m.labels.assign(header.begin() + 1, header.end());
  const auto r = static_cast<Index>(m.labels.size());
  m.values.resize(r, r);
  Index i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (i >= r || static_cast<Index>(fields.size()) != r + 1)
      throw_io("distance matrix: malformed CSV row " + std::to_string(i + 1));
    for (Index k = 0; k < r; ++k)
      m.values(i, k) = parse_number(fields[static_cast<std::size_t>(k + 1)]);
    ++i;
  }
  if (i != r) throw_io("distance matrix: expected " + std::to_string(r) + " rows");
  return m;
}

std::string embedding_to_string(const analysis::EmbeddingResult& e,
                                const std::vector<std::string>& labels, TableFormat format) {
  const Index r = e.coords.rows();
  const Index m = e.coords.cols();
  if (format == TableFormat::json) {
    ojson j;
    j["labels"] = labels;
    ojson coords = ojson::array();
    for (Index i = 0; i < r; ++i) {
      ojson row = ojson::array();
      for (Index c = 0; c < m; ++c) row.push_back(e.coords(i, c));
      coords.push_back(std::move(row));
    }
    j["coords"] = std::move(coords);
    ojson ev = ojson::array();
    for (Index c = 0; c < m; ++c) ev.push_back(e.eigvals[c]);
    j["eigvals"] = std::move(ev);
    j["kernel_scale"] = e.kernel_scale;
    return j.dump(2) + "\n";
  }
  std::string out = "label";
  for (Index c = 0; c < m; ++c) out += ",f" + std::to_string(c + 1);
  out += "\n";
  for (Index i = 0; i < r; ++i) {
    out += csv_field(labels.at(static_cast<std::size_t>(i)));
    for (Index c = 0; c < m; ++c) out += "," + format_double(e.coords(i, c));
    out += "\n";
  }
  return out;
}

}  // namespace les::io
