// Command-line front end: dataset generation, training, evaluation, width
// sweeps and full benchmark runs.

#include "rdo/bench.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>

namespace fs = std::filesystem;

namespace {

int run_gen_data(const std::string& example, long long n, long long seed,
                 const std::string& out, bool test_role, int grid) {
  rdo::DatagenParams prm;
  prm.n = n;
  prm.seed = static_cast<std::uint64_t>(seed);
  prm.grid_colloc = test_role;
  if (grid > 0) {
    prm.da_grid = grid;
    prm.da_eval_grid = grid;
  }
  const rdo::Dataset data = rdo::build_dataset(example, prm);
  rdo::save_dataset(data, out);
  std::printf("wrote %lld realizations (m=%lld, q=%lld) to %s\n",
              static_cast<long long>(data.size()), static_cast<long long>(data.input_dim()),
              static_cast<long long>(data.colloc_count()), out.c_str());
  return 0;
}

int run_train(const std::string& config_path, const std::string& data_dir,
              const std::string& model_dir) {
  const rdo::ExperimentConfig cfg = rdo::parse_config_file(config_path);
  const rdo::Dataset data = rdo::load_dataset(data_dir);
  rdo::RannDeepOnet model = rdo::make_model(cfg, data);
  const rdo::TrainReport report = rdo::train(model, data, rdo::train_config_of(cfg));
  rdo::save_model(model, model_dir);
  std::printf("trained %s: rows=%lld rank=%lld residual=%.6e in %.2fs (solve %.2fs)\n",
              cfg.example.c_str(), static_cast<long long>(report.rows_used),
              static_cast<long long>(report.effective_rank), report.residual_norm,
              report.train_seconds, report.solve_seconds);
  return 0;
}

int run_eval(const std::string& model_dir, const std::string& data_dir,
             const std::string& report_path) {
  const rdo::RannDeepOnet model = rdo::load_model(model_dir);
  const rdo::Dataset data = rdo::load_dataset(data_dir);
  const rdo::EvalSummary summary = rdo::evaluate_model(model, data);

  std::ofstream out(report_path, std::ios::trunc);
  rdo::require(out.good(), rdo::Err::IoError, "cannot write " + report_path);
  out << "n_test=" << data.size() << "\n";
  out << "mean_rel_l2=" << rdo::io::fmt_double(summary.mean_rel_l2) << "\n";
  out << "worst_rel_l2=" << rdo::io::fmt_double(summary.worst_rel_l2) << "\n";
  out << "worst_case_id=" << summary.worst_id << "\n";
  out.close();

  std::ofstream csv(report_path + ".per_case.csv", std::ios::trunc);
  csv << "id,shape,rel_l2\n";
  for (const auto& c : summary.cases)
    csv << c.id << "," << c.shape << "," << rdo::io::fmt_double(c.rel_l2) << "\n";

  std::printf("mean rel l2 = %.6e, worst = %.6e (case %lld)\n", summary.mean_rel_l2,
              summary.worst_rel_l2, static_cast<long long>(summary.worst_id));
  return 0;
}

int run_bench(const std::string& example, const std::string& scale, long long seed,
              const std::string& out, const std::string& cache) {
  rdo::ExperimentConfig cfg = rdo::preset(example, scale);
  cfg.seed = static_cast<std::uint64_t>(seed);
  const rdo::BenchReport report = rdo::run_experiment(cfg, cache, out);
  std::printf("%s/%s: mean rel l2 = %.6e, worst = %.6e, train %.1fs\n", example.c_str(),
              scale.c_str(), report.eval.mean_rel_l2, report.eval.worst_rel_l2,
              report.train_report.train_seconds);
  return 0;
}

int run_sweep(const std::string& example, const std::string& scale, const std::string& axis,
              const std::vector<long long>& values, long long fixed_k, long long fixed_p,
              long long seed, const std::string& out, const std::string& cache) {
  rdo::ExperimentConfig cfg = rdo::preset(example, scale);
  cfg.seed = static_cast<std::uint64_t>(seed);
  if (fixed_k > 0) cfg.k = fixed_k;
  if (fixed_p > 0) cfg.p = fixed_p;
  std::vector<Eigen::Index> vals(values.begin(), values.end());
  const auto rows = rdo::neuron_sweep(cfg, axis[0], vals, cache, out);
  for (const auto& r : rows)
    std::printf("%s=%lld -> mean rel l2 = %.6e\n", axis.c_str(),
                static_cast<long long>(r.value), r.mean_rel_l2);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomized DeepONet operator-learning benchmarks"};
  app.require_subcommand(1);

  std::string example, scale = "desk", out, cache = "bench_cache", config_path, data_dir,
              model_dir, report_path, axis;
  long long n = 100, seed = 1, grid = 0, fixed_k = 0, fixed_p = 0;
  bool test_role = false;
  std::vector<long long> values;

  auto* gen = app.add_subcommand("gen-data", "generate a dataset directory");
  gen->add_option("--example", example, "dr | burgers | darcy")->required();
  gen->add_option("--n", n, "number of realizations")->required();
  gen->add_option("--seed", seed, "master seed");
  gen->add_option("--out", out, "output directory")->required();
  gen->add_flag("--test", test_role, "evaluation set: collocation covers the full grid");
  gen->add_option("--grid", grid, "reference grid override (domain-input example)");

  auto* tr = app.add_subcommand("train", "train a model on a dataset");
  tr->add_option("--config", config_path, "key=value experiment config")->required();
  tr->add_option("--data", data_dir, "dataset directory")->required();
  tr->add_option("--out", model_dir, "model output directory")->required();

  auto* ev = app.add_subcommand("eval", "evaluate a trained model");
  ev->add_option("--model", model_dir, "model directory")->required();
  ev->add_option("--data", data_dir, "dataset directory")->required();
  ev->add_option("--report", report_path, "report file")->required();

  auto* sw = app.add_subcommand("sweep", "error-versus-width sweep");
  sw->add_option("--example", example, "dr | burgers | darcy | darcy_pi")->required();
  sw->add_option("--scale", scale, "paper | desk");
  sw->add_option("--axis", axis, "k | p")->required();
  sw->add_option("--values", values, "ascending widths")->required()->expected(-1);
  sw->add_option("--fixed-k", fixed_k, "pin the hidden width");
  sw->add_option("--fixed-p", fixed_p, "pin the output width");
  sw->add_option("--seed", seed, "master seed");
  sw->add_option("--out", out, "output directory")->required();
  sw->add_option("--cache", cache, "dataset cache directory");

  auto* be = app.add_subcommand("bench", "run a full benchmark");
  be->add_option("--example", example, "dr | burgers | darcy | darcy_pi")->required();
  be->add_option("--scale", scale, "paper | desk")->required();
  be->add_option("--seed", seed, "master seed");
  be->add_option("--out", out, "report directory")->required();
  be->add_option("--cache", cache, "dataset cache directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen_data(example, n, seed, out, test_role, grid);
    if (tr->parsed()) return run_train(config_path, data_dir, model_dir);
    if (ev->parsed()) return run_eval(model_dir, data_dir, report_path);
    if (sw->parsed())
      return run_sweep(example, scale, axis, values, fixed_k, fixed_p, seed, out, cache);
    if (be->parsed()) return run_bench(example, scale, seed, out, cache);
  } catch (const rdo::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
