// Command-line front end: synthetic network generation, layer clustering of
// SMT1 tensors, benchmark sweeps, SVG plots and a quick self test.
// Exit codes: 0 success, 1 runtime failure or any benchmark error row,
// 2 configuration error.
#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "dimple/bench.hpp"
#include "dimple/cluster.hpp"
#include "dimple/hooi.hpp"
#include "dimple/linalg.hpp"
#include "dimple/metrics.hpp"
#include "dimple/netgen.hpp"
#include "dimple/plot.hpp"

namespace fs = std::filesystem;
using namespace dimple;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

int cmd_generate(const std::string& config, const std::string& out_dir,
                 std::uint64_t seed_override, bool has_seed, bool dump_p) {
  ModelConfig model = model_from_json_file(config);
  if (model.n < 2 || model.L < 1)
    throw ConfigError("generate: model config must set n and L");
  if (has_seed) model.seed = seed_override;
  fs::create_directories(out_dir);
  const GroundTruth gt = build_ground_truth(model);
  const Tensor3 a = sample_adjacency(gt.P, mix_key(model.seed, {0x616466ULL}));
  save_smt1(a, (fs::path(out_dir) / "adjacency.smt1").string());
  save_labels_csv(gt.labels, (fs::path(out_dir) / "labels.csv").string());
  if (dump_p) save_prob_dump(gt.P, (fs::path(out_dir) / "p.bin").string());
  std::cout << "generate: n=" << model.n << " L=" << model.L
            << " density=" << estimate_sparsity(a) << " -> " << out_dir << "\n";
  return 0;
}

int cmd_cluster(const std::string& input, const std::string& algo, int M,
                std::vector<int> K, int rank_w_override, const std::string& threshold,
                double manual_t, std::uint64_t seed, const std::string& out_labels,
                const std::string& dump_scores, const std::string& dump_factors,
                bool sbm) {
  const Tensor3 a = load_smt1(input);
  if (int(K.size()) == 1 && M > 1) K.assign(std::size_t(M), K[0]);
  if (int(K.size()) != M) throw ConfigError("cluster: need one K per group");

  ClusterConfig cc;
  cc.M = M;
  cc.seed = seed;
  if (threshold == "separation") {
    cc.mode = ThresholdMode::Separation;
  } else if (threshold == "gap") {
    cc.mode = ThresholdMode::GapAdaptive;
  } else if (threshold == "formula") {
    cc.mode = ThresholdMode::FormulaT;
  } else if (threshold == "manual") {
    cc.mode = ThresholdMode::Manual;
    cc.manual_t = manual_t;
  } else {
    throw ConfigError("cluster: threshold must be separation, gap, formula or manual");
  }

  ClusteringResult res{{}, Matrix(), std::nullopt};
  if (algo == "tensor") {
    HooiConfig hc;
    hc.rank_u = default_rank_u(K, sbm);
    hc.rank_w = rank_w_override > 0 ? rank_w_override : default_rank_w(K, sbm);
    int kmax = 0;
    for (int km : K) kmax = std::max(kmax, km);
    const auto deltas = default_deltas(a.n1(), a.n3(), M, kmax);
    hc.delta_u = deltas.first;
    hc.delta_w = deltas.second;
    const FactorPair est = estimate_factors(a, hc);
    ClusterContext ctx{a.n1(), a.n3(), M, kmax, estimate_sparsity(a)};
    res = cluster_tensor(est.W, cc, ctx);
    if (!dump_factors.empty()) {
      save_factor_csv(est.U, "U", dump_factors + "_U.csv");
      save_factor_csv(est.W, "W", dump_factors + "_W.csv");
    }
  } else if (algo == "baseline") {
    if (!dump_factors.empty())
      throw ConfigError("cluster: --dump-factors applies to the tensor algorithm only");
    // Without known group labels every layer gets the maximal configured rank.
    int kmax = 0;
    for (int km : K) kmax = std::max(kmax, km);
    if (sbm) kmax -= 1;
    if (kmax < 1) throw ConfigError("cluster: ambient dimension too small for --sbm");
    res = cluster_baseline(a, std::vector<int>(a.n3(), kmax), M, cc);
  } else {
    throw ConfigError("cluster: algorithm must be tensor or baseline");
  }

  save_labels_csv(res.labels, out_labels);
  if (!dump_scores.empty()) {
    std::ofstream os(dump_scores);
    if (!os) throw std::runtime_error("cluster: cannot open " + dump_scores);
    os.precision(17);
    for (Eigen::Index i = 0; i < res.score.rows(); ++i) {
      for (Eigen::Index j = 0; j < res.score.cols(); ++j) {
        if (j) os << ',';
        os << res.score(i, j);
      }
      os << '\n';
    }
  }
  std::cout << "cluster: " << algo << " labels -> " << out_labels;
  if (res.threshold) std::cout << " (threshold " << *res.threshold << ")";
  std::cout << "\n";
  return 0;
}

int cmd_bench(const std::string& config, const std::string& out_dir, int threads,
              bool paper, std::uint64_t seed_override, bool has_seed) {
  ExperimentGrid grid = grid_from_json_file(config);
  if (!out_dir.empty()) grid.output_dir = out_dir;
  if (threads > 0) grid.threads = threads;
  if (paper) grid.replications = 100;
  if (has_seed) grid.base_seed = seed_override;
  grid.validate();
  const int errors = run_grid(grid);
  std::cout << "bench: results in " << grid.output_dir << " (" << errors
            << " error rows)\n";
  return errors == 0 ? 0 : 1;
}

int cmd_plot(const std::string& summary, const std::string& out_dir, std::string axis) {
  const auto rows = load_summary_csv(summary);
  if (axis.empty()) {
    // Infer the swept variable; ambiguous sweeps need an explicit --axis.
    std::vector<int> ns, ls;
    for (const auto& r : rows) {
      ns.push_back(r.n);
      ls.push_back(r.L);
    }
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    std::sort(ls.begin(), ls.end());
    ls.erase(std::unique(ls.begin(), ls.end()), ls.end());
    if (ns.size() > 1 && ls.size() == 1)
      axis = "n";
    else if (ls.size() > 1 && ns.size() == 1)
      axis = "L";
    else
      throw ConfigError("plot: sweep axis is ambiguous, pass --axis n or --axis L");
  }
  if (axis != "n" && axis != "L") throw ConfigError("plot: axis must be n or L");
  fs::create_directories(out_dir);
  const std::string path =
      (fs::path(out_dir) / ("rbl_vs_" + axis + ".svg")).string();
  write_svg_plot(rows, axis[0], path);
  std::cout << "plot: " << path << "\n";
  return 0;
}

// End-to-end checks on constructed noiseless inputs; fast and deterministic.
int cmd_selftest() {
  Timer total;
  int failures = 0;
  auto report = [&](const char* name, bool ok, double secs) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << secs << " s)\n";
    if (!ok) ++failures;
  };

  {
    Timer t;
    ModelConfig m;
    m.n = 100;
    m.L = 80;
    m.M = 3;
    m.K = {3, 3, 3};
    m.b_min = -0.05;
    m.b_max = 0.05;
    m.seed = 20240601;
    const GroundTruth gt = build_ground_truth(m);
    const Tensor3 pt = center(population_probability(gt));
    const FactorPair truth = true_factors(gt);

    // Tucker reconstruction through the population factors.
    Tensor3 core = mode_product(pt, truth.U.transpose(), 1);
    core = mode_product(core, truth.U.transpose(), 2);
    core = mode_product(core, truth.W.transpose(), 3);
    Tensor3 rec = mode_product(core, truth.U, 1);
    rec = mode_product(rec, truth.U, 2);
    rec = mode_product(rec, truth.W, 3);
    double resid = 0.0;
    for (int l = 0; l < pt.n3(); ++l)
      resid += (Eigen::Map<const Matrix>(pt.slice(l).data(), m.n, m.n) -
                Eigen::Map<const Matrix>(rec.slice(l).data(), m.n, m.n))
                   .squaredNorm();
    resid = std::sqrt(resid) / frobenius_norm(pt);
    report("tucker reconstruction identity", resid <= 1e-8, t.seconds());

    Timer t2;
    HooiConfig hc;
    hc.rank_u = default_rank_u(m.K);
    hc.rank_w = default_rank_w(m.K);
    const auto deltas = default_deltas(m.n, m.L, m.M, 3);
    hc.delta_u = deltas.first;
    hc.delta_w = deltas.second;
    const FactorPair est = estimate_factors(pt, hc);
    const auto [su, sw] = subspace_errors(truth, est);

    ClusterConfig cc;
    cc.M = m.M;
    cc.seed = 7;
    ClusterContext ctx{m.n, m.L, m.M, 3, 0.01};
    const ClusteringResult res = cluster_tensor(est.W, cc, ctx);
    const bool perfect = is_perfect(res.labels, gt.labels, m.M);
    report("noiseless factor recovery", su <= 1e-6 && sw <= 1e-6, t2.seconds());
    report("noiseless perfect clustering", perfect, t2.seconds());
  }

  {
    Timer t;
    LayerLabels s{{1, 1, 2, 2}, 2}, sh{{1, 1, 2, 1}, 2};
    const ErrorReport rep = misclassification_rate(sh, s, 2);
    report("misclassification rate", std::abs(rep.r_bl - 0.25) < 1e-15, t.seconds());
  }

  std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << " in "
            << total.seconds() << " s\n";
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diverse multiplex network toolkit: generation, tensor factor "
               "estimation, between-layer clustering and benchmarks"};
  app.require_subcommand(1);

  std::string config, out_dir, input, algo = "tensor", threshold = "separation";
  std::string out_labels = "labels.csv", dump_scores, dump_factors, summary, axis;
  std::uint64_t seed = 0;
  int threads = 0, M = 0, rank_w = 0;
  double manual_t = 0.0;
  std::vector<int> K;
  bool paper = false, dump_p = false, sbm = false;

  auto* gen = app.add_subcommand("generate", "sample a synthetic network");
  gen->add_option("--config", config, "model config JSON")->required();
  gen->add_option("--out", out_dir, "output directory")->required();
  auto* gen_seed = gen->add_option("--seed", seed, "override the model seed");
  gen->add_flag("--dump-p", dump_p, "also write the probability tensor dump");

  auto* clu = app.add_subcommand("cluster", "cluster the layers of an SMT1 tensor");
  clu->add_option("--in", input, "SMT1 adjacency file")->required();
  clu->add_option("--algo", algo, "tensor or baseline");
  clu->add_option("--M", M, "number of layer groups")->required();
  clu->add_option("--K", K, "ambient dimension(s), one value or one per group")->required();
  clu->add_option("--rank-w", rank_w, "override the mode-3 rank");
  clu->add_option("--threshold", threshold, "separation, gap, formula or manual");
  clu->add_option("--T", manual_t, "manual threshold value");
  clu->add_option("--seed", seed, "k-means seeding stream");
  clu->add_option("--out", out_labels, "output labels CSV");
  clu->add_option("--dump-scores", dump_scores, "write the score matrix CSV");
  clu->add_option("--dump-factors", dump_factors, "write factor CSVs with this prefix");
  clu->add_flag("--sbm", sbm, "block-model layers: reduce every ambient dimension by one");

  auto* ben = app.add_subcommand("bench", "run a benchmark grid");
  ben->add_option("--config", config, "grid config JSON")->required();
  ben->add_option("--out", out_dir, "output directory (overrides config)");
  ben->add_option("--threads", threads, "worker threads");
  ben->add_flag("--paper", paper, "use 100 replications");
  auto* ben_seed = ben->add_option("--seed", seed, "override the base seed");

  auto* plo = app.add_subcommand("plot", "render summary CSV as SVG");
  plo->add_option("--summary", summary, "summary.csv path")->required();
  plo->add_option("--out", out_dir, "output directory")->required();
  plo->add_option("--axis", axis, "swept variable: n or L");

  auto* self = app.add_subcommand("selftest", "run the noiseless end-to-end checks");
  (void)self;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (gen->parsed())
      return cmd_generate(config, out_dir, seed, gen_seed->count() > 0, dump_p);
    if (clu->parsed())
      return cmd_cluster(input, algo, M, K, rank_w, threshold, manual_t, seed,
                         out_labels, dump_scores, dump_factors, sbm);
    if (ben->parsed())
      return cmd_bench(config, out_dir, threads, paper, seed, ben_seed->count() > 0);
    if (plo->parsed()) return cmd_plot(summary, out_dir, axis);
    if (self->parsed()) return cmd_selftest();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
