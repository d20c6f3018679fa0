#pragma once

#include "rdo/common.hpp"
#include "rdo/features.hpp"
#include "rdo/geometry.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace rdo {

// One input realization: sensor values of the input function, collocation
// points, and (for data-driven training / evaluation) the reference solution.
struct Realization {
  Vector input;    // m values fed to the branch net
  Matrix colloc;   // q x coord_dim evaluation points
  Vector u;        // q reference values; empty when unavailable
  std::vector<std::uint8_t> mask;      // q; 0 marks points outside the domain
  std::vector<std::uint8_t> boundary;  // q; 1 marks boundary/initial points (in-memory only)
  std::optional<DomainSpec> domain;
};

struct DatasetMeta {
  std::string example;  // "dr" | "burgers" | "darcy"
  std::uint64_t seed = 0;
  Eigen::Index grid_nx = 0;
  Eigen::Index grid_nt = 0;
  // stratified collocation layout (per realization); zero when unused
  Eigen::Index strata_initial = 0;
  Eigen::Index strata_boundary = 0;
  Eigen::Index strata_interior = 0;
};

struct Dataset {
  Matrix sensors;  // m x sensor coordinate dim
  std::vector<Realization> realizations;
  DatasetMeta meta;

  Eigen::Index size() const { return static_cast<Eigen::Index>(realizations.size()); }
  Eigen::Index sensor_count() const { return sensors.rows(); }
  Eigen::Index colloc_count() const {
    return realizations.empty() ? 0 : realizations.front().colloc.rows();
  }
  Eigen::Index coord_dim() const {
    return realizations.empty() ? 0 : realizations.front().colloc.cols();
  }
  Eigen::Index input_dim() const {
    return realizations.empty() ? 0 : realizations.front().input.size();
  }
  bool has_solution_values() const {
    return !realizations.empty() && realizations.front().u.size() > 0;
  }
  bool stratified() const { return meta.strata_initial > 0; }

  /// Componentwise min/max of the branch inputs; degenerate components are
  /// widened so the box is always usable as a bias hypercube.
  Hypercube input_box() const {
    require(!realizations.empty(), Err::ConfigInvalid, "empty dataset has no input box");
    const Eigen::Index m = input_dim();
    Vector lo = realizations.front().input, hi = realizations.front().input;
    for (const auto& r : realizations) {
      lo = lo.cwiseMin(r.input);
      hi = hi.cwiseMax(r.input);
    }
    for (Eigen::Index d = 0; d < m; ++d) {
      if (hi(d) - lo(d) < 1e-12) {
        lo(d) -= 0.5;
        hi(d) += 0.5;
      }
    }
    return Hypercube(lo, hi);
  }
};

// --- directory serialization ---------------------------------------------------
//
// Layout: manifest (key=value text) plus flat little-endian float64 arrays
// sensors.f64, inputs.f64, colloc_xy.f64, colloc_u.f64 and mask.u8, all
// row-major with dimensions recorded in the manifest.

namespace io {

constexpr int kDatasetFormatVersion = 1;

inline std::string fmt_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  require(ec == std::errc(), Err::IoError, "double formatting failed");
  return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), Err::CorruptManifest,
          "bad float in manifest: " + std::string(s));
  return v;
}

inline void write_f64(const std::filesystem::path& path, const double* data, std::size_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), Err::IoError, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * 8));
  require(out.good(), Err::IoError, "short write to " + path.string());
}

inline std::vector<double> read_f64(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Err::IoError, "cannot open " + path.string());
  std::vector<double> data(count);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count * 8));
  require(static_cast<std::size_t>(in.gcount()) == count * 8, Err::TruncatedArray,
          "truncated array file " + path.string());
  char extra;
  require(!in.read(&extra, 1), Err::TruncatedArray, "oversized array file " + path.string());
  return data;
}

inline void write_u8(const std::filesystem::path& path, const std::uint8_t* data,
                     std::size_t count) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), Err::IoError, "cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count));
  require(out.good(), Err::IoError, "short write to " + path.string());
}

inline std::vector<std::uint8_t> read_u8(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Err::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> data(count);
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(count));
  require(static_cast<std::size_t>(in.gcount()) == count, Err::TruncatedArray,
          "truncated array file " + path.string());
  return data;
}

// simple ordered key=value manifest
class Manifest {
public:
  void set(const std::string& key, const std::string& value) {
    keys_.push_back(key);
    map_[key] = value;
  }
  void set_int(const std::string& key, long long v) { set(key, std::to_string(v)); }
  void set_double(const std::string& key, double v) { set(key, fmt_double(v)); }

  bool has(const std::string& key) const { return map_.count(key) > 0; }
  const std::vector<std::string>& keys() const { return keys_; }
  const std::string& get(const std::string& key) const {
    auto it = map_.find(key);
    require(it != map_.end(), Err::CorruptManifest, "manifest missing key: " + key);
    return it->second;
  }
  long long get_int(const std::string& key) const { return std::stoll(get(key)); }
  double get_double(const std::string& key) const { return parse_double(get(key)); }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    require(out.good(), Err::IoError, "cannot open " + path.string());
    for (const auto& k : keys_) out << k << "=" << map_.at(k) << "\n";
    require(out.good(), Err::IoError, "short write to " + path.string());
  }

  static Manifest load(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), Err::IoError, "cannot open " + path.string());
    Manifest m;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto eq = line.find('=');
      require(eq != std::string::npos, Err::CorruptManifest, "bad manifest line: " + line);
      m.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return m;
  }

private:
  std::vector<std::string> keys_;
  std::map<std::string, std::string> map_;
};

}  // namespace io

inline void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  require(data.size() > 0, Err::ConfigInvalid, "refusing to save an empty dataset");
  fs::create_directories(dir);

  const Eigen::Index n = data.size();
  const Eigen::Index m = data.input_dim();
  const Eigen::Index q = data.colloc_count();
  const Eigen::Index cd = data.coord_dim();
  const bool has_u = data.has_solution_values();

  io::Manifest man;
  man.set_int("format_version", io::kDatasetFormatVersion);
  man.set("example", data.meta.example);
  man.set_int("n", n);
  man.set_int("m", m);
  man.set_int("q", q);
  man.set_int("sensor_dim", data.sensors.cols());
  man.set_int("sensor_count", data.sensors.rows());
  man.set_int("coord_dim", cd);
  man.set_int("seed", static_cast<long long>(data.meta.seed));
  man.set_int("grid_nx", data.meta.grid_nx);
  man.set_int("grid_nt", data.meta.grid_nt);
  man.set_int("strata_initial", data.meta.strata_initial);
  man.set_int("strata_boundary", data.meta.strata_boundary);
  man.set_int("strata_interior", data.meta.strata_interior);
  man.set_int("has_u", has_u ? 1 : 0);

  const bool has_domains = data.realizations.front().domain.has_value();
  man.set_int("domain_count", has_domains ? n : 0);
  if (has_domains) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& dom = data.realizations[i].domain;
      require(dom.has_value(), Err::ConfigInvalid, "mixed domain presence in dataset");
      std::string line = std::to_string(shape_code(*dom));
      for (double p : domain_params(*dom)) line += " " + io::fmt_double(p);
      man.set("domain_" + std::to_string(i), line);
    }
  }
  man.save(dir / "manifest");

  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(n) * q * cd);
  for (Eigen::Index r = 0; r < data.sensors.rows(); ++r)
    for (Eigen::Index c = 0; c < data.sensors.cols(); ++c) buf.push_back(data.sensors(r, c));
  io::write_f64(dir / "sensors.f64", buf.data(), buf.size());

  buf.clear();
  for (const auto& r : data.realizations) {
    require(r.input.size() == m, Err::DimensionMismatch, "ragged realization inputs");
    for (Eigen::Index i = 0; i < m; ++i) buf.push_back(r.input(i));
  }
  io::write_f64(dir / "inputs.f64", buf.data(), buf.size());

  buf.clear();
  for (const auto& r : data.realizations) {
    require(r.colloc.rows() == q && r.colloc.cols() == cd, Err::DimensionMismatch,
            "ragged collocation blocks");
    for (Eigen::Index j = 0; j < q; ++j)
      for (Eigen::Index c = 0; c < cd; ++c) buf.push_back(r.colloc(j, c));
  }
  io::write_f64(dir / "colloc_xy.f64", buf.data(), buf.size());

  if (has_u) {
    buf.clear();
    for (const auto& r : data.realizations) {
      require(r.u.size() == q, Err::DimensionMismatch, "ragged solution values");
      for (Eigen::Index j = 0; j < q; ++j) buf.push_back(r.u(j));
    }
    io::write_f64(dir / "colloc_u.f64", buf.data(), buf.size());
  }

  std::vector<std::uint8_t> mask;
  mask.reserve(static_cast<std::size_t>(n) * q);
  for (const auto& r : data.realizations) {
    if (r.mask.empty())
      mask.insert(mask.end(), static_cast<std::size_t>(q), std::uint8_t{1});
    else {
      require(static_cast<Eigen::Index>(r.mask.size()) == q, Err::DimensionMismatch,
              "ragged masks");
      mask.insert(mask.end(), r.mask.begin(), r.mask.end());
    }
  }
  io::write_u8(dir / "mask.u8", mask.data(), mask.size());
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
  const io::Manifest man = io::Manifest::load(dir / "manifest");
  require(man.get_int("format_version") == io::kDatasetFormatVersion, Err::VersionMismatch,
          "unsupported dataset format version " + man.get("format_version"));

  Dataset data;
  data.meta.example = man.get("example");
  data.meta.seed = static_cast<std::uint64_t>(man.get_int("seed"));
  data.meta.grid_nx = man.get_int("grid_nx");
  data.meta.grid_nt = man.get_int("grid_nt");
  data.meta.strata_initial = man.get_int("strata_initial");
  data.meta.strata_boundary = man.get_int("strata_boundary");
  data.meta.strata_interior = man.get_int("strata_interior");

  const Eigen::Index n = man.get_int("n");
  const Eigen::Index m = man.get_int("m");
  const Eigen::Index q = man.get_int("q");
  const Eigen::Index sd = man.get_int("sensor_dim");
  const Eigen::Index sc = man.get_int("sensor_count");
  const Eigen::Index cd = man.get_int("coord_dim");
  const bool has_u = man.get_int("has_u") != 0;
  require(n >= 1 && m >= 1 && q >= 1, Err::CorruptManifest, "degenerate dataset dimensions");

  const auto sensors = io::read_f64(dir / "sensors.f64", static_cast<std::size_t>(sc) * sd);
  data.sensors.resize(sc, sd);
  for (Eigen::Index r = 0; r < sc; ++r)
    for (Eigen::Index c = 0; c < sd; ++c) data.sensors(r, c) = sensors[r * sd + c];

  const auto inputs = io::read_f64(dir / "inputs.f64", static_cast<std::size_t>(n) * m);
  const auto colloc = io::read_f64(dir / "colloc_xy.f64", static_cast<std::size_t>(n) * q * cd);
  std::vector<double> uvals;
  if (has_u) uvals = io::read_f64(dir / "colloc_u.f64", static_cast<std::size_t>(n) * q);
  const auto mask = io::read_u8(dir / "mask.u8", static_cast<std::size_t>(n) * q);

  const Eigen::Index domain_count = man.get_int("domain_count");
  require(domain_count == 0 || domain_count == n, Err::CorruptManifest,
          "domain_count must be 0 or n");

  data.realizations.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Realization& r = data.realizations[i];
    r.input.resize(m);
    for (Eigen::Index d = 0; d < m; ++d) r.input(d) = inputs[i * m + d];
    r.colloc.resize(q, cd);
    for (Eigen::Index j = 0; j < q; ++j)
      for (Eigen::Index c = 0; c < cd; ++c)
        r.colloc(j, c) = colloc[(static_cast<std::size_t>(i) * q + j) * cd + c];
    if (has_u) {
      r.u.resize(q);
      for (Eigen::Index j = 0; j < q; ++j) r.u(j) = uvals[static_cast<std::size_t>(i) * q + j];
    }
    r.mask.assign(mask.begin() + static_cast<std::ptrdiff_t>(i) * q,
                  mask.begin() + static_cast<std::ptrdiff_t>(i + 1) * q);
    if (domain_count > 0) {
      std::istringstream line(man.get("domain_" + std::to_string(i)));
      int code = -1;
      line >> code;
      std::vector<double> params;
      std::string tok;
      while (line >> tok) params.push_back(io::parse_double(tok));
      r.domain = domain_from_params(code, params);
    }
    require(r.input.allFinite() && r.colloc.allFinite() && (r.u.size() == 0 || r.u.allFinite()),
            Err::NonFinite, "dataset contains non-finite values");
  }
  return data;
}

}  // namespace rdo
