// wwl: command-line front end for the graph kernels, weight learning and experiments.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wwl/wwl.hpp"

namespace fs = std::filesystem;
using namespace wwl;

namespace {

struct Options {
  std::string dataset;
  std::string kind = "wwl";
  std::vector<int> H;
  std::vector<double> gamma, C, eps;
  double alpha1 = 1.0, alpha2 = 0.5, sigma = 0.1;
  double mu = 1e-4;
  int T = 500;
  std::optional<double> offset;
  std::uint64_t seed = 0;
  std::string out = "out";
  int threads = 1;
  std::string variant = "sgd";
  std::string weights;
  int folds = 10, repeats = 10, inner_folds = 5;
  int runs = 10;
  std::size_t per_group = 20;
};

// Bare names such as "MUTAG" fall back to the bundled data directory.
fs::path resolve_dataset(const std::string& name) {
  if (name.empty()) throw std::invalid_argument("--dataset is required");
  fs::path p(name);
  if (fs::exists(p)) return p;
#ifdef WWL_DATA_DIR
  if (fs::path bundled = fs::path(WWL_DATA_DIR) / name; fs::exists(bundled)) return bundled;
#endif
  return p;  // the loader reports the missing file
}

LossConfig loss_of(const Options& o) {
  LossConfig l{o.alpha1, o.alpha2, o.sigma};
  l.validate();
  return l;
}

json config_json(const std::string& command, const Options& o) {
  json j{{"command", command},   {"dataset", o.dataset}, {"kind", o.kind},       {"H", o.H},
         {"gamma", o.gamma},     {"C", o.C},             {"eps", o.eps},         {"alpha1", o.alpha1},
         {"alpha2", o.alpha2},   {"sigma", o.sigma},     {"mu", o.mu},           {"T", o.T},
         {"seed", o.seed},       {"threads", o.threads}, {"variant", o.variant}, {"out", o.out}};
  if (o.offset) j["offset"] = *o.offset;
  if (!o.weights.empty()) j["weights"] = o.weights;
  return j;
}

// CSV outputs carry their configuration in a sidecar `<file>.config.json`.
void write_csv(const fs::path& path, const std::string& body, const json& config) {
  write_file_atomic(path, body);
  write_file_atomic(fs::path(path.string() + ".config.json"), config.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

void write_json(const fs::path& path, const json& j) {
  write_file_atomic(path, j.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

int single(const std::vector<int>& v, int fallback, const char* flag) {
  if (v.empty()) return fallback;
  if (v.size() > 1) throw std::invalid_argument(std::string(flag) + " takes a single value for this command");
  return v[0];
}

double single(const std::vector<double>& v, double fallback, const char* flag) {
  if (v.empty()) return fallback;
  if (v.size() > 1) throw std::invalid_argument(std::string(flag) + " takes a single value for this command");
  return v[0];
}

void cmd_stats(const Options& o) {
  const auto ds = load_dataset(resolve_dataset(o.dataset));
  const auto s = compute_stats(ds);
  std::printf("%-12s %8s %8s %8s %10s %12s %8s\n", "dataset", "graphs", "class+1", "class-1", "avg_nodes",
              "avg_edges", "labels");
  std::printf("%-12s %8zu %8zu %8zu %10.1f %12.1f %8zu\n", ds.name.c_str(), s.n_graphs,
              s.class_counts.count(1) ? s.class_counts.at(1) : 0, s.class_counts.count(-1) ? s.class_counts.at(-1) : 0,
              s.avg_nodes, s.avg_directed_edges, s.n_node_labels);
}

void cmd_kernel(const Options& o) {
  const auto ds = load_dataset(resolve_dataset(o.dataset));
  const auto kind = parse_kernel_kind(o.kind);
  const int H = single(o.H, 2, "--H");
  const double gamma = single(o.gamma, 1e-2, "--gamma");
  if (H < 1) throw std::invalid_argument("--H must be >= 1");
  const auto r = refine(ds, H);
  std::optional<WeightVector> W;
  if (kind == KernelKind::Weighted) {
    if (o.weights.empty()) throw std::invalid_argument("weighted kernel requires --weights <file.json>");
    std::ifstream in(o.weights);
    if (!in) throw std::runtime_error("cannot open weights file " + o.weights);
    const auto j = json::parse(in);
    for (const auto& e : j.at("weights")) {
      const int h = e.at("h").get<int>();
      if (h > H || r.alphabet(h).key(e.at("label").get<int>()).str() != e.at("key").get<std::string>())
        throw std::invalid_argument("weights file " + o.weights + " does not match this dataset and H");
    }
    W = weights_from_json(j, r);
  }
  const auto K = gram_matrix(kind, r, W ? &*W : nullptr, gamma, o.threads);
  const auto cfg = config_json("kernel", o);
  const fs::path out(o.out);
  write_csv(out / "kernel.csv", matrix_to_csv(K.values), cfg);
  write_file_atomic(out / "kernel.libsvm", matrix_to_libsvm(K.values, ds.class_labels()));
  std::cout << "wrote " << (out / "kernel.libsvm").string() << "\n";
  std::printf("min eigenvalue: %.6e\n", min_eigenvalue(K.values));
}

void cmd_learn(const Options& o) {
  const auto ds = load_dataset(resolve_dataset(o.dataset));
  const int H = single(o.H, 2, "--H");
  const double eps = single(o.eps, 1.0, "--eps");
  const auto r = refine(ds, H);
  const SgdConfig sgd{o.mu, o.T, mix_seed(o.seed, 7)};
  const ConstraintConfig cons{eps, o.offset};
  LearnResult res;
  if (o.variant == "sgd") res = sgd_learn(ds, r, loss_of(o), sgd, cons);
  else if (o.variant == "batch") res = batch_learn(ds, r, loss_of(o), sgd, cons);
  else throw std::invalid_argument("--variant must be sgd or batch");

  auto j = weights_to_json(res.weights, r);
  j["config"] = config_json("learn", o);
  const fs::path out(o.out);
  write_json(out / "weights.json", j);
  std::string trace = "step,loss\n";
  for (std::size_t t = 0; t < res.loss_trace.size(); ++t)
    trace += std::to_string(t) + "," + format_number(res.loss_trace[t]) + "\n";
  write_csv(out / "loss_trace.csv", trace, j["config"]);
}

void cmd_generate(const Options& o) {
  const auto split = generate_synthetic_dataset(mix_seed(o.seed, 8), o.per_group);
  GraphDataset all{"SYNTH", split.train.graphs};
  all.graphs.insert(all.graphs.end(), split.test.graphs.begin(), split.test.graphs.end());
  const fs::path out(o.out), tmp = out / ".SYNTH.partial", dst = out / "SYNTH";
  fs::remove_all(tmp);
  write_tu_dataset(all, tmp);
  auto cfg = config_json("generate", o);
  cfg["per_group"] = o.per_group;
  cfg["train_graphs"] = split.train.size();
  write_file_atomic(tmp / "SYNTH.config.json", cfg.dump(2) + "\n");
  fs::remove_all(dst);
  fs::rename(tmp, dst);
  std::cout << "wrote " << dst.string() << " (" << all.size() << " graphs; first " << split.train.size()
            << " are the training groups)\n";
}

Grids grids_of(const Options& o, Grids g) {
  if (!o.H.empty()) g.H = o.H;
  if (!o.C.empty()) g.C = o.C;
  if (!o.gamma.empty()) g.gamma = o.gamma;
  if (!o.eps.empty()) g.epsilon = o.eps;
  return g;
}

void exp_benchmark(const Options& o, bool kind_given) {
  const auto ds = load_dataset(resolve_dataset(o.dataset));
  const Grids grids = grids_of(o, Grids{});
  const CvConfig cv{o.folds, o.repeats, o.inner_folds, o.seed, o.threads};
  std::vector<KernelKind> kinds{KernelKind::Subtree, KernelKind::OptimalAssignment, KernelKind::Wwl,
                                KernelKind::Weighted};
  if (kind_given) kinds = {parse_kernel_kind(o.kind)};

  auto cfg = config_json("experiment benchmark", o);
  cfg["folds"] = o.folds;
  cfg["repeats"] = o.repeats;
  cfg["inner_folds"] = o.inner_folds;
  std::string summary = "kernel,mean_accuracy,std_accuracy\n";
  std::string folds = "kernel,repeat,fold,n_test,accuracy,H,C,gamma,eps\n";
  json report{{"config", cfg}, {"results", json::object()}};
  std::map<KernelKind, CvResult> results;
  for (auto kind : kinds) {
    KernelRecipe recipe{kind, loss_of(o), SgdConfig{o.mu, o.T, 0}, o.offset};
    const auto res = cross_validate(ds, recipe, grids, cv);
    results[kind] = res;
    std::printf("%-9s %.2f +- %.2f\n", to_string(kind), 100 * res.mean, 100 * res.stddev);
    summary += std::string(to_string(kind)) + "," + format_number(res.mean) + "," + format_number(res.stddev) + "\n";
    for (const auto& f : res.folds)
      folds += std::string(to_string(kind)) + "," + std::to_string(f.repeat) + "," + std::to_string(f.fold) + "," +
               std::to_string(f.n_test) + "," + format_number(f.accuracy) + "," + std::to_string(f.params.H) + "," +
               format_number(f.params.C) + "," + format_number(f.params.gamma) + "," + format_number(f.params.epsilon) +
               "\n";
    report["results"][to_string(kind)] = {
        {"mean", res.mean}, {"std", res.stddev}, {"repeat_accuracies", res.repeat_accuracies}};
  }
  if (results.count(KernelKind::Wwl) && results.count(KernelKind::Weighted) && o.repeats >= 2) {
    const auto t = paired_ttest_onesided(results[KernelKind::Weighted].repeat_accuracies,
                                         results[KernelKind::Wwl].repeat_accuracies);
    report["ttest_weighted_vs_wwl"] = {{"t", t.t}, {"p_value", t.p_value}, {"dof", t.dof},
                                       {"mean_difference", t.mean_difference}};
    std::printf("weighted vs wwl: t = %.3f, one-sided p = %.4f\n", t.t, t.p_value);
  }
  const fs::path out(o.out);
  write_csv(out / "benchmark.csv", summary, cfg);
  write_csv(out / "benchmark_folds.csv", folds, cfg);
  write_json(out / "benchmark.json", report);
}

void exp_synthetic(const Options& o, const CLI::App& app) {
  SyntheticConfig sc;
  sc.seed = o.seed;
  sc.runs = o.runs;
  sc.per_group = o.per_group;
  sc.loss = loss_of(o);
  if (app.count("--mu")) sc.sgd.learning_rate = o.mu;
  if (app.count("--T")) sc.sgd.iterations = o.T;
  if (o.offset) sc.offset = o.offset;
  if (!o.H.empty()) sc.H = single(o.H, sc.H, "--H");
  sc.grids = grids_of(o, sc.grids);
  sc.grids.H = {sc.H};

  const auto rep = run_synthetic_experiment(sc);
  auto cfg = config_json("experiment synthetic", o);
  cfg["mu"] = sc.sgd.learning_rate;
  cfg["T"] = sc.sgd.iterations;
  cfg["H"] = sc.H;
  cfg["runs"] = sc.runs;
  cfg["per_group"] = sc.per_group;
  std::string csv = "run,data_seed,wwl_accuracy,weighted_accuracy,weighted_eps,motif_weight,median_weight\n";
  json runs = json::array();
  for (std::size_t k = 0; k < rep.runs.size(); ++k) {
    const auto& r = rep.runs[k];
    csv += std::to_string(k) + "," + std::to_string(r.data_seed) + "," + format_number(r.wwl_accuracy) + "," +
           format_number(r.weighted_accuracy) + "," + format_number(r.weighted_params.epsilon) + "," +
           format_number(r.motif_weight) + "," + format_number(r.median_weight) + "\n";
    json top = json::array();
    for (std::size_t t = 0; t < std::min<std::size_t>(5, r.h1_weights.size()); ++t)
      top.push_back({{"pattern", r.h1_weights[t].pattern}, {"weight", r.h1_weights[t].weight}});
    runs.push_back({{"data_seed", r.data_seed},
                    {"wwl_accuracy", r.wwl_accuracy},
                    {"weighted_accuracy", r.weighted_accuracy},
                    {"motif_weight", r.motif_weight},
                    {"median_weight", r.median_weight},
                    {"top_h1_patterns", top}});
  }
  std::printf("wwl %.2f%%  weighted %.2f%%  motif above median in %d/%zu runs\n", 100 * rep.mean_wwl,
              100 * rep.mean_weighted, rep.motif_above_median, rep.runs.size());
  const fs::path out(o.out);
  write_csv(out / "synthetic.csv", csv, cfg);
  write_json(out / "synthetic.json", {{"config", cfg},
                                      {"mean_wwl", rep.mean_wwl},
                                      {"mean_weighted", rep.mean_weighted},
                                      {"motif_above_median", rep.motif_above_median},
                                      {"runs", runs}});
}

void exp_runtime(const Options& o, const CLI::App& app) {
  RuntimeConfig rc;
  rc.seed = o.seed;
  rc.loss = loss_of(o);
  if (app.count("--mu")) rc.learning_rate = o.mu;
  if (app.count("--T")) rc.steps = o.T;
  if (!o.eps.empty()) rc.epsilon = single(o.eps, rc.epsilon, "--eps");
  if (!o.H.empty()) rc.iterations = o.H;
  const auto rows = run_runtime_experiment(rc);
  auto cfg = config_json("experiment runtime", o);
  cfg["T"] = rc.steps;
  cfg["mu"] = rc.learning_rate;
  std::string csv = "variant,N,H,seconds\n";
  for (const auto& r : rows) {
    csv += r.variant + "," + std::to_string(r.N) + "," + std::to_string(r.H) + "," + format_number(r.seconds) + "\n";
    std::printf("%-6s N=%-4zu H=%d  %.4fs\n", r.variant.c_str(), r.N, r.H, r.seconds);
  }
  write_csv(fs::path(o.out) / "runtime.csv", csv, cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weisfeiler-Lehman graph kernels with learned Wasserstein label weights"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--dataset", o.dataset, "TU dataset directory or bundled name (e.g. MUTAG)");
    c->add_option("--kind", o.kind, "kernel: wl, wloa, wwl, weighted")
        ->check(CLI::IsMember({"wl", "wloa", "wwl", "weighted"}));
    c->add_option("--H", o.H, "WL iterations (a list for grids)")->expected(1, -1);
    c->add_option("--gamma", o.gamma, "Laplacian kernel scale (a list for grids)")->expected(1, -1);
    c->add_option("--C", o.C, "SVM C grid")->expected(1, -1);
    c->add_option("--eps", o.eps, "ball radius epsilon (a list for grids)")->expected(1, -1);
    c->add_option("--alpha1", o.alpha1, "margin for different-class pairs");
    c->add_option("--alpha2", o.alpha2, "margin for same-class pairs");
    c->add_option("--sigma", o.sigma, "smoothing width of the hinge losses");
    c->add_option("--mu", o.mu, "learning rate");
    c->add_option("--T", o.T, "learning iterations");
    c->add_option("--offset", o.offset, "distance offset b (default 1 + eps)");
    c->add_option("--seed", o.seed, "master seed");
    c->add_option("--out", o.out, "output directory");
    c->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
    c->add_option("--variant", o.variant, "learning variant: sgd or batch")->check(CLI::IsMember({"sgd", "batch"}));
  };

  auto* stats = app.add_subcommand("stats", "print dataset statistics");
  common(stats);
  auto* kernel = app.add_subcommand("kernel", "write a Gram matrix (CSV and LIBSVM precomputed)");
  common(kernel);
  kernel->add_option("--weights", o.weights, "weights JSON from `learn` (weighted kind)");
  auto* learn = app.add_subcommand("learn", "learn label weights");
  common(learn);
  auto* generate = app.add_subcommand("generate", "write the synthetic motif dataset in TU format");
  common(generate);
  generate->add_option("--per-group", o.per_group, "graphs per template group");

  auto* experiment = app.add_subcommand("experiment", "run an experiment driver");
  experiment->require_subcommand(1);
  auto* bench = experiment->add_subcommand("benchmark", "repeated nested cross-validation of all kernels");
  common(bench);
  bench->add_option("--folds", o.folds, "outer folds");
  bench->add_option("--repeats", o.repeats, "outer repetitions");
  bench->add_option("--inner-folds", o.inner_folds, "inner model-selection folds");
  auto* synth = experiment->add_subcommand("synthetic", "motif experiment on generated datasets");
  common(synth);
  synth->add_option("--runs", o.runs, "number of generated datasets");
  synth->add_option("--per-group", o.per_group, "graphs per template group");
  auto* runtime = experiment->add_subcommand("runtime", "stochastic vs full-batch learning time");
  common(runtime);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*stats) cmd_stats(o);
    else if (*kernel) cmd_kernel(o);
    else if (*learn) cmd_learn(o);
    else if (*generate) cmd_generate(o);
    else if (*bench) exp_benchmark(o, bench->count("--kind") > 0);
    else if (*synth) exp_synthetic(o, *synth);
    else if (*runtime) exp_runtime(o, *runtime);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
