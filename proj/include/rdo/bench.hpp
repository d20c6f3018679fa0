#pragma once

#include "rdo/datagen.hpp"
#include "rdo/model_io.hpp"
#include "rdo/train.hpp"

#include <omp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace rdo {

// --- experiment configuration ---------------------------------------------------

struct ExperimentConfig {
  std::string example;  // dr | burgers | darcy | darcy_pi
  std::string scale;    // paper | desk
  Eigen::Index n_train = 0;
  Eigen::Index n_test = 0;
  Eigen::Index m = 0;  // branch input dimension
  Eigen::Index k = 0;  // branch hidden width
  Eigen::Index p = 0;  // trunk width
  double r_b = 1.0;
  double r_t = 1.0;
  Eigen::Index sample_budget = 0;
  std::uint64_t seed = 1;
  bool hard_constraint = true;
  SolverPath solver = SolverPath::Svd;
  double rel_tol = 1e-10;
  double ridge = 0.0;
  double lambda = 1.0;
  int train_grid = 0;  // domain-input reference grid (0 = preset default)

  bool physics_informed() const { return example == "darcy_pi"; }
  std::string dataset_example() const { return example == "darcy_pi" ? "darcy" : example; }
};

/// Benchmark presets. Paper scale uses the published hyperparameters; desk
/// scale shrinks realization counts, widths and budgets so a full run fits in
/// minutes on a laptop CPU. Large paper-scale systems go through the
/// normal-equations path, the only one that finishes those sizes in
/// reasonable time; the smallest preset keeps the default SVD route.
inline ExperimentConfig preset(const std::string& example, const std::string& scale) {
  require(scale == "paper" || scale == "desk", Err::ConfigInvalid,
          "scale must be paper or desk");
  const bool paper = scale == "paper";
  ExperimentConfig cfg;
  cfg.example = example;
  cfg.scale = scale;
  cfg.solver = SolverPath::NormalEquations;

  if (example == "dr") {
    cfg.m = 100;
    if (paper) {
      cfg.n_train = 10000; cfg.n_test = 1000;
      cfg.k = 120; cfg.p = 100;
      cfg.sample_budget = 40000;
    } else {
      cfg.n_train = 1000; cfg.n_test = 100;
      cfg.k = 60; cfg.p = 50;
      cfg.sample_budget = 10000;
      cfg.solver = SolverPath::Svd;
    }
    cfg.r_b = 0.003; cfg.r_t = 8.0;
  } else if (example == "burgers") {
    cfg.m = 101;
    if (paper) {
      cfg.n_train = 1000; cfg.n_test = 100;
      cfg.k = 200; cfg.p = 120;
      cfg.sample_budget = 86432;
    } else {
      cfg.n_train = 200; cfg.n_test = 50;
      cfg.k = 80; cfg.p = 60;
      cfg.sample_budget = 20000;
    }
    cfg.r_b = 0.5; cfg.r_t = 2.0;
  } else if (example == "darcy" || example == "darcy_pi") {
    cfg.m = 200;
    const bool pi = example == "darcy_pi";
    if (paper) {
      cfg.n_train = 2700; cfg.n_test = 300;
      cfg.k = pi ? 150 : 200; cfg.p = 60;
      cfg.sample_budget = pi ? 120000 : 150000;
      cfg.train_grid = 151;
    } else {
      cfg.n_train = 300; cfg.n_test = 60;
      cfg.k = 100; cfg.p = 40;
      cfg.sample_budget = 40000;
      cfg.train_grid = 121;
    }
    cfg.r_b = 0.05; cfg.r_t = pi ? 2.0 : 1.0;
  } else {
    fail(Err::ConfigInvalid, "unknown example id: " + example);
  }
  return cfg;
}

/// Flat key=value config files; unknown keys are rejected.
inline ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  const io::Manifest man = io::Manifest::load(path);
  require(man.has("example"), Err::ConfigInvalid, "config must name an example");
  ExperimentConfig cfg =
      preset(man.get("example"), man.has("scale") ? man.get("scale") : "desk");

  static const std::vector<std::string> known = {
      "example", "scale",  "n_train", "n_test",         "m",       "k",
      "p",       "r_b",    "r_t",     "sample_budget",  "seed",    "hard_constraint",
      "solver",  "rel_tol", "ridge",  "lambda",         "train_grid"};
  for (const auto& key : man.keys()) {
    require(std::find(known.begin(), known.end(), key) != known.end(), Err::ConfigInvalid,
            "unknown config key: " + key);
  }
  if (man.has("n_train")) cfg.n_train = man.get_int("n_train");
  if (man.has("n_test")) cfg.n_test = man.get_int("n_test");
  if (man.has("m")) cfg.m = man.get_int("m");
  if (man.has("k")) cfg.k = man.get_int("k");
  if (man.has("p")) cfg.p = man.get_int("p");
  if (man.has("r_b")) cfg.r_b = man.get_double("r_b");
  if (man.has("r_t")) cfg.r_t = man.get_double("r_t");
  if (man.has("sample_budget")) cfg.sample_budget = man.get_int("sample_budget");
  if (man.has("seed")) cfg.seed = static_cast<std::uint64_t>(man.get_int("seed"));
  if (man.has("hard_constraint")) cfg.hard_constraint = man.get_int("hard_constraint") != 0;
  if (man.has("solver")) {
    const std::string s = man.get("solver");
    require(s == "svd" || s == "normal", Err::ConfigInvalid, "solver must be svd or normal");
    cfg.solver = s == "svd" ? SolverPath::Svd : SolverPath::NormalEquations;
  }
  if (man.has("rel_tol")) cfg.rel_tol = man.get_double("rel_tol");
  if (man.has("ridge")) cfg.ridge = man.get_double("ridge");
  if (man.has("lambda")) cfg.lambda = man.get_double("lambda");
  if (man.has("train_grid")) cfg.train_grid = static_cast<int>(man.get_int("train_grid"));
  require(cfg.k >= 1 && cfg.p >= 1 && cfg.n_train >= 1, Err::ConfigInvalid,
          "k, p and n_train must be positive");
  return cfg;
}

// --- dataset plumbing ------------------------------------------------------------

inline DatagenParams datagen_params(const ExperimentConfig& cfg, bool test_set) {
  DatagenParams prm;
  prm.n = test_set ? cfg.n_test : cfg.n_train;
  prm.grid_colloc = test_set;
  // train and test realizations come from disjoint seed streams
  prm.seed = derive_seed(cfg.seed, test_set ? 0x7e57 : 0);
  if (cfg.dataset_example() == "darcy" && cfg.train_grid > 0) prm.da_grid = cfg.train_grid;
  return prm;
}

inline std::filesystem::path dataset_cache_path(const std::filesystem::path& cache_dir,
                                                const ExperimentConfig& cfg, bool test_set) {
  const DatagenParams prm = datagen_params(cfg, test_set);
  std::string name = cfg.dataset_example();
  name += test_set ? "_test" : "_train";
  name += "_n" + std::to_string(prm.n);
  name += "_s" + std::to_string(prm.seed);
  if (cfg.dataset_example() == "darcy")
    name += "_g" + std::to_string(test_set ? prm.da_eval_grid : prm.da_grid);
  return cache_dir / name;
}

/// Loads the cached dataset or generates and caches it.
inline Dataset obtain_dataset(const ExperimentConfig& cfg, bool test_set,
                              const std::filesystem::path& cache_dir) {
  const std::filesystem::path dir = dataset_cache_path(cache_dir, cfg, test_set);
  if (std::filesystem::exists(dir / "manifest")) return load_dataset(dir);
  const Dataset data = build_dataset(cfg.dataset_example(), datagen_params(cfg, test_set));
  save_dataset(data, dir);
  return data;
}

// --- model construction -----------------------------------------------------------

inline RannDeepOnet make_model(const ExperimentConfig& cfg, const Dataset& train_data) {
  ModelConfig mc;
  mc.sensor_dim = cfg.m;
  mc.branch_width = cfg.k;
  mc.trunk_width = cfg.p;
  mc.branch_range = cfg.r_b;
  mc.trunk_range = cfg.r_t;
  mc.seed = cfg.seed;
  mc.branch_cube = train_data.input_box();
  require(train_data.input_dim() == cfg.m, Err::ConfigInvalid,
          "dataset input dimension does not match the configured m");

  const std::string ex = cfg.dataset_example();
  if (ex == "dr") {
    mc.trunk_cube = Hypercube::unit(2);
    if (cfg.hard_constraint)
      mc.constraint = dirichlet_wrapper(std::make_shared<TimeScaledBubbleField>());
  } else if (ex == "burgers") {
    PeriodicEmbedding embed;
    embed.omega = 2.0 * M_PI;
    embed.harmonics = 1;
    embed.periodic_dims = {0};
    embed.raw_dim = 2;
    mc.embedding = embed;
    Vector lo(3), hi(3);
    lo << -1.0, -1.0, 0.0;
    hi << 1.0, 1.0, 1.0;
    mc.trunk_cube = Hypercube(lo, hi);
  } else {  // darcy family
    mc.trunk_cube = Hypercube(Vector::Zero(2), Vector::Constant(2, 2.0));
    mc.constraint = domain_dirichlet_wrapper();
  }
  return build_model(mc);
}

// --- evaluation --------------------------------------------------------------------

struct CaseError {
  Eigen::Index id = 0;
  int shape = -1;  // domain family code, -1 outside the domain-input example
  double rel_l2 = 0.0;
};

struct EvalSummary {
  double mean_rel_l2 = 0.0;
  double worst_rel_l2 = 0.0;
  Eigen::Index worst_id = 0;
  std::vector<CaseError> cases;
  // per-shape breakdown, filled for the domain-input example
  std::array<double, 3> shape_mean{0.0, 0.0, 0.0};
  std::array<double, 3> shape_worst{0.0, 0.0, 0.0};
};

/// Mean/worst relative l2 error over a test set whose realizations share one
/// evaluation grid. Trunk features are computed once for the grid; for the
/// domain-input example the error is restricted to points inside each domain
/// and the stored mask must agree with geometric containment exactly.
inline EvalSummary evaluate_model(const RannDeepOnet& model, const Dataset& test_data) {
  require(model.trained(), Err::Untrained, "evaluate_model needs a trained model");
  const Eigen::Index n = test_data.size();
  const Eigen::Index q = test_data.colloc_count();
  const Matrix& grid = test_data.realizations.front().colloc;
  for (const auto& r : test_data.realizations)
    require(r.colloc.rows() == q, Err::DimensionMismatch, "test realizations must share a grid");

  Matrix trunk(q, model.trunk_width());
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < q; ++j)
    trunk.row(j) = trunk_features(model, grid.row(j)).transpose();

  EvalSummary summary;
  summary.cases.resize(n);
  std::array<double, 3> shape_sum{0.0, 0.0, 0.0};
  std::array<int, 3> shape_count{0, 0, 0};

#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Realization& r = test_data.realizations[i];
    const Vector w = model.alpha * branch_features(model, r.input);  // p
    const Vector core = trunk * w;

    double num = 0.0, den = 0.0;
    if (r.domain) {
      const ConstraintWrapper cw = model.constraint.bind_domain(*r.domain);
      Eigen::Index inside = 0;
      for (Eigen::Index j = 0; j < q; ++j) {
        const bool in = contains(*r.domain, r.colloc(j, 0), r.colloc(j, 1));
        require(in == (r.mask[j] != 0), Err::ConfigInvalid,
                "stored mask disagrees with geometric containment");
        if (!in) continue;
        ++inside;
        const Vector y = r.colloc.row(j);
        const double pred = cw.c_value(y) * core(j) + cw.g_value(y);
        num += (pred - r.u(j)) * (pred - r.u(j));
        den += r.u(j) * r.u(j);
      }
      require(inside > 0, Err::DegenerateDomain, "test domain covers no grid points");
    } else {
      const ConstraintWrapper& cw = model.constraint;
      for (Eigen::Index j = 0; j < q; ++j) {
        const Vector y = r.colloc.row(j);
        const double pred = cw.c_value(y) * core(j) + cw.g_value(y);
        num += (pred - r.u(j)) * (pred - r.u(j));
        den += r.u(j) * r.u(j);
      }
    }
    require(den > 0.0, Err::ZeroReference, "test realization has zero reference norm");
    summary.cases[i] = {i, r.domain ? shape_code(*r.domain) : -1, std::sqrt(num / den)};
  }

  double acc = 0.0;
  for (const auto& c : summary.cases) {
    acc += c.rel_l2;
    if (c.rel_l2 > summary.worst_rel_l2) {
      summary.worst_rel_l2 = c.rel_l2;
      summary.worst_id = c.id;
    }
    if (c.shape >= 0) {
      shape_sum[c.shape] += c.rel_l2;
      ++shape_count[c.shape];
      summary.shape_worst[c.shape] = std::max(summary.shape_worst[c.shape], c.rel_l2);
    }
  }
  summary.mean_rel_l2 = acc / static_cast<double>(n);
  for (int s = 0; s < 3; ++s)
    if (shape_count[s] > 0) summary.shape_mean[s] = shape_sum[s] / shape_count[s];
  return summary;
}

// --- full experiment ---------------------------------------------------------------

struct BenchReport {
  ExperimentConfig config;
  EvalSummary eval;
  TrainReport train_report;
  double datagen_seconds = 0.0;
  double eval_seconds = 0.0;
  double total_seconds = 0.0;
};

namespace detail {

inline const char* shape_name(int code) {
  switch (code) {
    case 0: return "ellipse";
    case 1: return "rectangle";
    default: return "triangle";
  }
}

}  // namespace detail

/// Deterministic report body: configuration and error metrics only. Wall-clock
/// timings and environment metadata go to a separate volatile file so reports
/// from identical seeds compare byte-identical.
inline void write_report(const BenchReport& r, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "report.txt", std::ios::trunc);
    require(out.good(), Err::IoError, "cannot write report");
    const auto& c = r.config;
    out << "example=" << c.example << "\n";
    out << "scale=" << c.scale << "\n";
    out << "n_train=" << c.n_train << "\n";
    out << "n_test=" << c.n_test << "\n";
    out << "m=" << c.m << "\n";
    out << "k=" << c.k << "\n";
    out << "p=" << c.p << "\n";
    out << "r_b=" << io::fmt_double(c.r_b) << "\n";
    out << "r_t=" << io::fmt_double(c.r_t) << "\n";
    out << "sample_budget=" << c.sample_budget << "\n";
    out << "seed=" << c.seed << "\n";
    out << "hard_constraint=" << (c.hard_constraint ? 1 : 0) << "\n";
    out << "solver=" << (c.solver == SolverPath::Svd ? "svd" : "normal") << "\n";
    out << "rel_tol=" << io::fmt_double(c.rel_tol) << "\n";
    out << "ridge=" << io::fmt_double(c.ridge) << "\n";
    out << "lambda=" << io::fmt_double(c.lambda) << "\n";
    out << "rows_used=" << r.train_report.rows_used << "\n";
    out << "effective_rank=" << r.train_report.effective_rank << "\n";
    out << "residual_norm=" << io::fmt_double(r.train_report.residual_norm) << "\n";
    out << "mean_rel_l2=" << io::fmt_double(r.eval.mean_rel_l2) << "\n";
    out << "worst_rel_l2=" << io::fmt_double(r.eval.worst_rel_l2) << "\n";
    out << "worst_case_id=" << r.eval.worst_id << "\n";
    if (c.dataset_example() == "darcy") {
      for (int s = 0; s < 3; ++s) {
        out << "mean_rel_l2_" << detail::shape_name(s) << "="
            << io::fmt_double(r.eval.shape_mean[s]) << "\n";
        out << "worst_rel_l2_" << detail::shape_name(s) << "="
            << io::fmt_double(r.eval.shape_worst[s]) << "\n";
      }
    }
  }
  {
    std::ofstream out(out_dir / "timing.txt", std::ios::trunc);
    out << "datagen_seconds=" << r.datagen_seconds << "\n";
    out << "train_seconds=" << r.train_report.train_seconds << "\n";
    out << "solve_seconds=" << r.train_report.solve_seconds << "\n";
    out << "eval_seconds=" << r.eval_seconds << "\n";
    out << "total_seconds=" << r.total_seconds << "\n";
    out << "threads=" << omp_get_max_threads() << "\n";
  }
  {
    std::ofstream out(out_dir / "per_case.csv", std::ios::trunc);
    out << "id,shape,rel_l2\n";
    for (const auto& c : r.eval.cases)
      out << c.id << "," << c.shape << "," << io::fmt_double(c.rel_l2) << "\n";
  }
}

inline void write_worst_case_dump(const RannDeepOnet& model, const Dataset& test_data,
                                  Eigen::Index worst_id, const std::filesystem::path& out_dir) {
  const Realization& r = test_data.realizations[worst_id];
  ConstraintWrapper cw = model.constraint;
  if (r.domain && cw.per_domain) cw = cw.bind_domain(*r.domain);
  const Vector pred = evaluate_batch(model, r.input, r.colloc, &cw);
  std::ofstream out(out_dir / "worst_case.csv", std::ios::trunc);
  out << "coord0,coord1,ref,pred,abs_err\n";
  for (Eigen::Index j = 0; j < r.colloc.rows(); ++j) {
    if (!r.mask.empty() && r.mask[j] == 0) continue;
    out << io::fmt_double(r.colloc(j, 0)) << "," << io::fmt_double(r.colloc(j, 1)) << ","
        << io::fmt_double(r.u(j)) << "," << io::fmt_double(pred(j)) << ","
        << io::fmt_double(std::abs(pred(j) - r.u(j))) << "\n";
  }
}

inline TrainConfig train_config_of(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.mode = cfg.physics_informed() ? TrainMode::PhysicsInformed : TrainMode::DataDriven;
  tc.sample_budget = cfg.sample_budget;
  tc.boundary_weight = cfg.lambda;
  tc.rel_tol = cfg.rel_tol;
  tc.ridge = cfg.ridge;
  tc.seed = derive_seed(cfg.seed, 0x7a11);
  tc.path = cfg.solver;
  tc.stratified = cfg.dataset_example() == "burgers";
  return tc;
}

inline BenchReport run_experiment(const ExperimentConfig& cfg,
                                  const std::filesystem::path& cache_dir,
                                  const std::filesystem::path& out_dir,
                                  RannDeepOnet* trained_out = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  BenchReport report;
  report.config = cfg;

  const Dataset train_data = obtain_dataset(cfg, false, cache_dir);
  const Dataset test_data = obtain_dataset(cfg, true, cache_dir);
  report.datagen_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RannDeepOnet model = make_model(cfg, train_data);
  report.train_report = train(model, train_data, train_config_of(cfg));

  const auto te = std::chrono::steady_clock::now();
  report.eval = evaluate_model(model, test_data);
  report.eval_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - te).count();
  report.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_report(report, out_dir);
  write_worst_case_dump(model, test_data, report.eval.worst_id, out_dir);
  if (trained_out) *trained_out = std::move(model);
  return report;
}

// --- width sweeps ------------------------------------------------------------------

struct SweepRow {
  Eigen::Index value = 0;
  double mean_rel_l2 = 0.0;
  double worst_rel_l2 = 0.0;
};

/// Repeats the experiment varying one width axis; emits sweep.csv for plotting
/// error-versus-width curves.
inline std::vector<SweepRow> neuron_sweep(const ExperimentConfig& base, char axis,
                                          const std::vector<Eigen::Index>& values,
                                          const std::filesystem::path& cache_dir,
                                          const std::filesystem::path& out_dir) {
  require(axis == 'k' || axis == 'p', Err::ConfigInvalid, "sweep axis must be k or p");
  for (std::size_t i = 1; i < values.size(); ++i)
    require(values[i] > values[i - 1], Err::ConfigInvalid, "sweep values must ascend");

  std::vector<SweepRow> rows;
  for (const Eigen::Index v : values) {
    ExperimentConfig cfg = base;
    (axis == 'k' ? cfg.k : cfg.p) = v;
    const BenchReport r =
        run_experiment(cfg, cache_dir, out_dir / (std::string(1, axis) + std::to_string(v)));
    rows.push_back({v, r.eval.mean_rel_l2, r.eval.worst_rel_l2});
  }

  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "sweep.csv", std::ios::trunc);
  out << "axis,value,mean_rel_l2,worst_rel_l2\n";
  for (const auto& r : rows)
    out << axis << "," << r.value << "," << io::fmt_double(r.mean_rel_l2) << ","
        << io::fmt_double(r.worst_rel_l2) << "\n";
  return rows;
}

}  // namespace rdo
