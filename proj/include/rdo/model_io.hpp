#pragma once

#include "rdo/dataset.hpp"
#include "rdo/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>

namespace rdo {

// Model directory layout: manifest.json (dimensions, seeds, constraint kind,
// embedding) plus flat little-endian float64 arrays (row-major) for the layer
// weights, biases and the trained coefficients.

namespace io {

constexpr int kModelFormatVersion = 1;

inline void write_matrix(const std::filesystem::path& p, const Matrix& m) {
  std::vector<double> buf;
  buf.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) buf.push_back(m(r, c));
  write_f64(p, buf.data(), buf.size());
}

inline Matrix read_matrix(const std::filesystem::path& p, Eigen::Index rows, Eigen::Index cols) {
  const auto buf = read_f64(p, static_cast<std::size_t>(rows) * cols);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = buf[r * cols + c];
  return m;
}

}  // namespace io

/// Named fixed constraint fields, the ones a model file can refer to.
inline std::shared_ptr<const ScalarField> make_named_field(const std::string& name) {
  if (name == "time_bubble") return std::make_shared<TimeScaledBubbleField>();
  if (name == "interval_bubble") return std::make_shared<IntervalBubbleField>();
  fail(Err::CorruptManifest, "unknown constraint field: " + name);
}

inline std::string named_field_of(const ConstraintWrapper& cw) {
  if (cw.kind == ConstraintKind::None) return "none";
  if (cw.per_domain) return "domain";
  if (std::dynamic_pointer_cast<const TimeScaledBubbleField>(cw.c)) return "time_bubble";
  if (std::dynamic_pointer_cast<const IntervalBubbleField>(cw.c)) return "interval_bubble";
  fail(Err::ConfigInvalid, "constraint field has no serializable name");
}

inline void save_model(const RannDeepOnet& model, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  nlohmann::ordered_json man;
  man["format_version"] = io::kModelFormatVersion;
  man["seed"] = model.seed;
  auto layer_json = [](const RandomLayer& l) {
    nlohmann::ordered_json j;
    j["width"] = l.width();
    j["in_dim"] = l.in_dim();
    j["activation"] = l.activation == Activation::Tanh ? "tanh" : "identity";
    j["weight_seed"] = l.weight_seed;
    j["bias_seed"] = l.bias_seed;
    j["has_anchors"] = l.anchors.has_value();
    return j;
  };
  man["branch"] = layer_json(model.branch);
  man["trunk"] = layer_json(model.trunk);
  man["constraint"] = named_field_of(model.constraint);
  if (model.embedding) {
    nlohmann::ordered_json e;
    e["omega"] = model.embedding->omega;
    e["harmonics"] = model.embedding->harmonics;
    e["periodic_dims"] = model.embedding->periodic_dims;
    e["raw_dim"] = model.embedding->raw_dim;
    man["embedding"] = e;
  } else {
    man["embedding"] = nullptr;
  }
  man["trained"] = model.trained();

  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  require(out.good(), Err::IoError, "cannot open model manifest");
  out << man.dump(2) << "\n";
  out.close();

  io::write_matrix(dir / "branch_w.f64", model.branch.weights);
  io::write_matrix(dir / "branch_b.f64", model.branch.biases);
  io::write_matrix(dir / "trunk_w.f64", model.trunk.weights);
  io::write_matrix(dir / "trunk_b.f64", model.trunk.biases);
  if (model.branch.anchors) io::write_matrix(dir / "branch_anchors.f64", *model.branch.anchors);
  if (model.trunk.anchors) io::write_matrix(dir / "trunk_anchors.f64", *model.trunk.anchors);
  if (model.trained()) io::write_matrix(dir / "alpha.f64", model.alpha);
}

inline RannDeepOnet load_model(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  require(in.good(), Err::IoError, "cannot open model manifest");
  nlohmann::json man;
  try {
    in >> man;
  } catch (const nlohmann::json::exception& e) {
    fail(Err::CorruptManifest, std::string("bad model manifest: ") + e.what());
  }
  require(man.value("format_version", -1) == io::kModelFormatVersion, Err::VersionMismatch,
          "unsupported model format version");

  RannDeepOnet model;
  model.seed = man.at("seed").get<std::uint64_t>();
  auto load_layer = [&](const nlohmann::json& j, const std::string& prefix) {
    RandomLayer l;
    const Eigen::Index width = j.at("width").get<Eigen::Index>();
    const Eigen::Index in_dim = j.at("in_dim").get<Eigen::Index>();
    l.weights = io::read_matrix(dir / (prefix + "_w.f64"), width, in_dim);
    l.biases = io::read_matrix(dir / (prefix + "_b.f64"), width, 1);
    l.activation = j.at("activation") == "tanh" ? Activation::Tanh : Activation::Identity;
    l.weight_seed = j.at("weight_seed").get<std::uint64_t>();
    l.bias_seed = j.at("bias_seed").get<std::uint64_t>();
    if (j.at("has_anchors").get<bool>())
      l.anchors = io::read_matrix(dir / (prefix + "_anchors.f64"), width, in_dim);
    return l;
  };
  model.branch = load_layer(man.at("branch"), "branch");
  model.trunk = load_layer(man.at("trunk"), "trunk");

  const std::string cname = man.at("constraint").get<std::string>();
  if (cname == "domain")
    model.constraint = domain_dirichlet_wrapper();
  else if (cname != "none")
    model.constraint = dirichlet_wrapper(make_named_field(cname));

  if (!man.at("embedding").is_null()) {
    PeriodicEmbedding e;
    const auto& j = man.at("embedding");
    e.omega = j.at("omega").get<double>();
    e.harmonics = j.at("harmonics").get<int>();
    e.periodic_dims = j.at("periodic_dims").get<std::vector<int>>();
    e.raw_dim = j.at("raw_dim").get<int>();
    model.embedding = e;
  }
  if (man.at("trained").get<bool>())
    model.alpha =
        io::read_matrix(dir / "alpha.f64", model.trunk.width(), model.branch.width());
  return model;
}

}  // namespace rdo
