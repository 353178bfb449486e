#include "les/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <vector>

#include "les/error.hpp"
#include "les/random.hpp"

namespace les::data {

void validate(const PointCloud& cloud) {
  if (cloud.size() < 2)
    throw_config("point cloud '" + cloud.name + "' needs at least 2 samples, got " +
                 std::to_string(cloud.size()));
  if (cloud.dim() < 1) throw_config("point cloud '" + cloud.name + "' has no features");
  for (Index i = 0; i < cloud.size(); ++i)
    for (Index j = 0; j < cloud.dim(); ++j)
      if (!std::isfinite(cloud.points(i, j)))
        throw_config("point cloud '" + cloud.name + "': non-finite value at row " +
                     std::to_string(i + 1) + ", column " + std::to_string(j + 1));
}

PointCloud make_point_cloud(RowMatrix points, std::string name, Source source,
                            std::optional<std::uint64_t> seed) {
  PointCloud cloud{std::move(points), std::move(name), source, seed};
  validate(cloud);
  return cloud;
}

// ---------------------------------------------------------------------------

namespace {

bool is_separator(char ch) { return ch == ',' || ch == ' ' || ch == '\t' || ch == '\r'; }

std::vector<double> parse_csv_row(const std::string& line, std::size_t row,
                                  const std::string& file) {
  std::vector<double> values;
  const char* p = line.data();
  const char* end = p + line.size();
  auto fail = [&](const std::string& why) {
    throw_io(file + ": row " + std::to_string(row) + ": " + why);
  };
  bool expect_value = true;
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    if (*p == ',') {
      if (expect_value) fail("empty field");
      expect_value = true;
      ++p;
      continue;
    }
    const char* start = p;
    while (p < end && !is_separator(*p)) ++p;
    const char* num = start;
    if (*num == '+') ++num;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(num, p, value);
    if (ec != std::errc() || ptr != p)
      fail("cannot parse '" + std::string(start, p) + "' as a number");
    if (!std::isfinite(value)) fail("non-finite value '" + std::string(start, p) + "'");
    values.push_back(value);
    expect_value = false;
  }
  if (expect_value && !values.empty()) fail("trailing separator");
  return values;
}

PointCloud load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_io("cannot open " + path.string());
  const std::string file = path.string();
  std::vector<double> flat;
  Index cols = -1;
  std::size_t row = 0;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    ++row;
    std::vector<double> values = parse_csv_row(line, row, file);
    if (cols < 0) {
      cols = static_cast<Index>(values.size());
    } else if (static_cast<Index>(values.size()) != cols) {
      throw_io(file + ": row " + std::to_string(row) + ": ragged row with " +
               std::to_string(values.size()) + " columns, expected " + std::to_string(cols));
    }
    flat.insert(flat.end(), values.begin(), values.end());
  }
  if (row == 0) throw_io(file + ": empty file");
  RowMatrix points = Eigen::Map<RowMatrix>(flat.data(), static_cast<Index>(row), cols);
  PointCloud cloud{std::move(points), path.stem().string(), Source::file, std::nullopt};
  validate(cloud);
  return cloud;
}

std::uint64_t read_u64_le(const unsigned char* bytes) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

void write_u64_le(std::ostream& out, std::uint64_t v) {
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double decode_f64_le(const unsigned char* bytes) {
  return std::bit_cast<double>(read_u64_le(bytes));
}

PointCloud load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path.string());
  const std::string file = path.string();
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  constexpr std::size_t header = sizeof(kBinaryMagic) + 16;
  if (bytes.empty()) throw_io(file + ": empty file");
  if (bytes.size() < header || std::memcmp(bytes.data(), kBinaryMagic, sizeof(kBinaryMagic)) != 0)
    throw_io(file + ": missing LESPC1 header");
  const std::uint64_t n = read_u64_le(bytes.data() + sizeof(kBinaryMagic));
  const std::uint64_t d = read_u64_le(bytes.data() + sizeof(kBinaryMagic) + 8);
  if (n == 0 || d == 0) throw_io(file + ": empty file");
  if (d > (bytes.size() - header) / 8 / n || bytes.size() - header != n * d * 8)
    throw_io(file + ": payload size does not match header (N=" + std::to_string(n) +
             ", d=" + std::to_string(d) + ")");
  RowMatrix points(static_cast<Index>(n), static_cast<Index>(d));
  const unsigned char* p = bytes.data() + header;
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < d; ++j, p += 8) {
      const double v = decode_f64_le(p);
      if (!std::isfinite(v))
        throw_io(file + ": row " + std::to_string(i + 1) + ": non-finite value");
      points(static_cast<Index>(i), static_cast<Index>(j)) = v;
    }
  PointCloud cloud{std::move(points), path.stem().string(), Source::file, std::nullopt};
  validate(cloud);
  return cloud;
}

}  // namespace

FileFormat detect_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_io("cannot open " + path.string());
  char head[sizeof(kBinaryMagic)] = {};
  in.read(head, sizeof(head));
  if (in.gcount() == sizeof(head) && std::memcmp(head, kBinaryMagic, sizeof(head)) == 0)
    return FileFormat::binary_f64;
  return FileFormat::csv;
}

PointCloud load_point_cloud(const std::filesystem::path& path, FileFormat format) {
  return format == FileFormat::csv ? load_csv(path) : load_binary(path);
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
  return load_point_cloud(path, detect_format(path));
}

void save_point_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                      FileFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_io("cannot write " + path.string());
  if (format == FileFormat::binary_f64) {
    out.write(kBinaryMagic, sizeof(kBinaryMagic));
    write_u64_le(out, static_cast<std::uint64_t>(cloud.size()));
    write_u64_le(out, static_cast<std::uint64_t>(cloud.dim()));
    for (Index i = 0; i < cloud.size(); ++i)
      for (Index j = 0; j < cloud.dim(); ++j)
        write_u64_le(out, std::bit_cast<std::uint64_t>(cloud.points(i, j)));
  } else {
    char buf[64];
    for (Index i = 0; i < cloud.size(); ++i) {
      for (Index j = 0; j < cloud.dim(); ++j) {
        if (j > 0) out.put(',');
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), cloud.points(i, j));
        out.write(buf, ptr - buf);
      }
      out.put('\n');
    }
  }
  if (!out) throw_io("write failed: " + path.string());
}

// ---------------------------------------------------------------------------

void ToriConfig::validate() const {
  if (!(R1 > 0.0) || !(R2 > 0.0) || !(R3 > 0.0)) throw_config("tori radii must be positive");
  if (!(c > 0.0) || c > 1.0) throw_config("tori scale c must lie in (0, 1]");
  if (n_points < 2) throw_config("tori need at least 2 points");
}

Eigen::Vector3d torus2_point(double R1, double R2, double theta1, double theta2) {
  const double ring = R1 + R2 * std::cos(theta2);
  return {ring * std::cos(theta1), ring * std::sin(theta1), R2 * std::sin(theta2)};
}

Eigen::Vector4d torus3_point(double R1, double R2, double R3, double theta1, double theta2,
                             double theta3) {
  const double tube = R2 + R3 * std::cos(theta3);
  const double ring = R1 + tube * std::cos(theta2);
  return {ring * std::cos(theta1), ring * std::sin(theta1), tube * std::sin(theta2),
          R3 * std::sin(theta3)};
}

namespace {

RowMatrix draw_angles(Index n, int count, std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix angles(n, count);
  for (int k = 0; k < count; ++k)
    for (Index i = 0; i < n; ++i) angles(i, k) = 2.0 * std::numbers::pi * rng.uniform();
  return angles;
}

std::string torus_name(const char* base, double c) {
  if (c == 1.0) return base;
  std::ostringstream os;
  os << base << "_sc" << c;
  return os.str();
}

}  // namespace

PointCloud generate_torus2(const ToriConfig& cfg) {
  cfg.validate();
  const RowMatrix angles = draw_angles(cfg.n_points, 2, cfg.seed);
  RowMatrix points(cfg.n_points, 3);
  const double minor = cfg.c * cfg.R2;
  for (Index i = 0; i < cfg.n_points; ++i)
    points.row(i) = torus2_point(cfg.R1, minor, angles(i, 0), angles(i, 1)).transpose();
  return make_point_cloud(std::move(points), torus_name("T2", cfg.c), Source::generator, cfg.seed);
}

PointCloud generate_torus3(const ToriConfig& cfg) {
  cfg.validate();
  RowMatrix angles = draw_angles(cfg.n_points, 3, cfg.seed);
  RowMatrix points(cfg.n_points, 4);
  const double minor = cfg.c * cfg.R3;
  for (Index i = 0; i < cfg.n_points; ++i)
    points.row(i) =
        torus3_point(cfg.R1, cfg.R2, minor, angles(i, 0), angles(i, 1), angles(i, 2)).transpose();
  return make_point_cloud(std::move(points), torus_name("T3", cfg.c), Source::generator, cfg.seed);
}

// ---------------------------------------------------------------------------

Metric Metric::euclidean() { return Metric("euclidean", nullptr); }

Metric Metric::custom(std::string name, SqDistanceFn fn) {
  if (!fn) throw_config("custom metric '" + name + "' has no callback");
  return Metric(std::move(name), std::move(fn));
}

double Metric::sq_distance(const double* a, const double* b, Index dim) const {
  if (!fn_) {
    double s = 0.0;
    for (Index k = 0; k < dim; ++k) {
      const double diff = a[k] - b[k];
      s += diff * diff;
    }
    return s;
  }
  const double s = fn_(std::span<const double>(a, static_cast<std::size_t>(dim)),
                       std::span<const double>(b, static_cast<std::size_t>(dim)));
  if (!std::isfinite(s) || s < 0.0)
    throw_numerical("metric '" + name_ + "' returned an invalid squared distance");
  return s;
}

Matrix pairwise_sq_dists(const PointCloud& cloud, const Metric& metric) {
  const Index n = cloud.size();
  const Index d = cloud.dim();
  Matrix out = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const double* xj = cloud.points.row(j).data();
    for (Index i = 0; i < j; ++i) {
      const double s = metric.sq_distance(cloud.points.row(i).data(), xj, d);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return out;
}

double median_inplace(std::span<double> values) {
  if (values.empty()) throw_config("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid),
                   values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

bool kernel_scale_subsamples(Index n, std::size_t subsample_cap) {
  const auto pairs = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
  return pairs > subsample_cap;
}

namespace {

template <class PairFn>
double scale_from_pairs(Index n, double multiplier, std::size_t cap, std::uint64_t seed,
                        PairFn&& sq) {
  if (!(multiplier > 0.0)) throw_config("kernel scale multiplier must be positive");
  if (cap == 0) throw_config("subsample cap must be positive");
  if (n < 2) throw_config("kernel scale needs at least 2 samples");
  std::vector<double> values;
  if (!kernel_scale_subsamples(n, cap)) {
    values.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
    for (Index j = 1; j < n; ++j)
      for (Index i = 0; i < j; ++i) values.push_back(sq(i, j));
  } else {
    Rng rng(seed);
    values.reserve(cap);
    const auto un = static_cast<std::uint64_t>(n);
    for (std::size_t s = 0; s < cap; ++s) {
      const auto i = static_cast<Index>(rng.below(un));
      auto j = static_cast<Index>(rng.below(un - 1));
      if (j >= i) ++j;
      values.push_back(sq(i, j));
    }
  }
  if (std::none_of(values.begin(), values.end(), [](double v) { return v > 0.0; }))
    throw_numerical("degenerate distances: all off-diagonal distances are zero");
  const double med = median_inplace(values);
  if (!(med > 0.0))
    throw_numerical("degenerate distances: median squared distance is zero");
  return multiplier * med;
}

}  // namespace

double kernel_scale(const Matrix& sq_dists, double multiplier, std::size_t subsample_cap,
                    std::uint64_t seed) {
  if (sq_dists.rows() != sq_dists.cols()) throw_config("kernel scale needs a square matrix");
  return scale_from_pairs(sq_dists.rows(), multiplier, subsample_cap, seed,
                          [&](Index i, Index j) { return sq_dists(i, j); });
}

double kernel_scale(const PointCloud& cloud, double multiplier, std::size_t subsample_cap,
                    std::uint64_t seed, const Metric& metric) {
  const Index d = cloud.dim();
  return scale_from_pairs(cloud.size(), multiplier, subsample_cap, seed, [&](Index i, Index j) {
    return metric.sq_distance(cloud.points.row(i).data(), cloud.points.row(j).data(), d);
  });
}

}  // namespace les::data
