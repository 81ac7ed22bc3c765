#include "dimple/bench.hpp"

#include <atomic>
#include <bit>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "dimple/hooi.hpp"
#include "dimple/metrics.hpp"

namespace dimple {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kTagCell = 0x63656c6cULL;      // per-replication seed
constexpr std::uint64_t kTagAdjacency = 0x73616d70ULL; // adjacency sample
constexpr std::uint64_t kTagKmeans = 0x6b6d6e73ULL;    // k-means stream

std::string dist_name(const LatentSpec& spec) {
  switch (spec.kind) {
    case LatentDist::TruncatedNormal: return "truncated_normal";
    case LatentDist::MultinomialFirstK: return "multinomial_first_k";
    case LatentDist::DirichletFirstK: return "dirichlet_first_k";
  }
  return "unknown";
}

// Error messages land in a CSV field; keep them single-token-safe.
std::string sanitize_error(std::string msg) {
  for (char& ch : msg)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return msg;
}

std::optional<double> parse_opt(const std::string& field) {
  if (field.empty()) return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc())
    throw std::runtime_error("bench: malformed numeric field '" + field + "'");
  return v;
}

std::vector<std::string> split_csv(const std::string& line, std::size_t expect) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  if (out.size() != expect)
    throw std::runtime_error("bench: expected " + std::to_string(expect) +
                             " fields, got " + std::to_string(out.size()));
  return out;
}

ResultRow score_tensor(const Tensor3& a, const GroundTruth& gt, const ModelConfig& model,
                       std::uint64_t rep_seed, ThresholdMode mode, double manual_t) {
  ResultRow row;
  HooiConfig hc;
  hc.rank_u = default_rank_u(model.K);
  hc.rank_w = default_rank_w(model.K);
  const auto deltas = default_deltas(model.n, model.L, model.M, model.max_k());
  hc.delta_u = deltas.first;
  hc.delta_w = deltas.second;

  const FactorPair est = estimate_factors(a, hc);
  row.hooi_iters = est.iterations_run;

  ClusterConfig cc;
  cc.M = model.M;
  cc.mode = mode;
  cc.manual_t = manual_t;
  cc.seed = mix_key(rep_seed, {kTagKmeans, 1});
  ClusterContext ctx{model.n, model.L, model.M, model.max_k(), estimate_sparsity(a)};
  const ClusteringResult res = cluster_tensor(est.W, cc, ctx);

  const ErrorReport rep = misclassification_rate(res.labels, gt.labels, model.M);
  row.r_bl = rep.r_bl;
  const FactorPair truth = true_factors(gt);
  const auto [su, sw] = subspace_errors(truth, est);
  row.sin_theta_u = su;
  row.sin_theta_w = sw;
  return row;
}

ResultRow score_baseline(const Tensor3& a, const GroundTruth& gt, const ModelConfig& model,
                         std::uint64_t rep_seed) {
  ResultRow row;
  std::vector<int> k_per_layer(model.L);
  for (int l = 0; l < model.L; ++l) k_per_layer[l] = model.K[gt.labels.s[l] - 1];

  ClusterConfig cc;
  cc.M = model.M;
  cc.seed = mix_key(rep_seed, {kTagKmeans, 2});
  const ClusteringResult res = cluster_baseline(a, k_per_layer, model.M, cc);
  row.r_bl = misclassification_rate(res.labels, gt.labels, model.M).r_bl;
  return row;
}

}  // namespace

void ExperimentGrid::validate() const {
  if (sweep.axis != 'n' && sweep.axis != 'L')
    throw ConfigError("grid: sweep axis must be 'n' or 'L'");
  if (sweep.values.empty()) throw ConfigError("grid: sweep values must be nonempty");
  for (int v : sweep.values)
    if (v < 2) throw ConfigError("grid: swept values must be >= 2");
  if (sweep.fixed < 2) throw ConfigError("grid: fixed dimension must be >= 2");
  if (replications < 1) throw ConfigError("grid: replications must be >= 1");
  if (algorithms.empty()) throw ConfigError("grid: algorithms must be nonempty");
  for (const auto& a : algorithms)
    if (a != "tensor" && a != "baseline")
      throw ConfigError("grid: unknown algorithm '" + a + "'");
  if (threads < 1) throw ConfigError("grid: threads must be >= 1");
  if (output_dir.empty()) throw ConfigError("grid: output_dir must be set");
  ModelConfig probe = model;
  probe.n = sweep.axis == 'n' ? sweep.values.front() : sweep.fixed;
  probe.L = sweep.axis == 'L' ? sweep.values.front() : sweep.fixed;
  try {
    probe.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

std::vector<ResultRow> run_cell(const ModelConfig& model,
                                const std::vector<std::string>& algorithms,
                                std::uint64_t base_seed, int replications, int threads,
                                ThresholdMode threshold_mode, double manual_t) {
  model.validate();
  const int n_algos = int(algorithms.size());
  std::vector<ResultRow> rows(std::size_t(replications) * n_algos);

  auto worker_body = [&](int rep) {
    const std::uint64_t rep_seed =
        mix_key(base_seed, {kTagCell, std::uint64_t(model.n), std::uint64_t(model.L),
                            std::uint64_t(rep)});
    std::string shared_error;
    GroundTruth gt{Tensor3(1, 1, 1), {}, {}, {}};
    Tensor3 a(1, 1, 1);
    try {
      ModelConfig cell_model = model;
      cell_model.seed = rep_seed;
      gt = build_ground_truth(cell_model);
      a = sample_adjacency(gt.P, mix_key(rep_seed, {kTagAdjacency}));
    } catch (const std::exception& e) {
      shared_error = sanitize_error(e.what());
    }

    for (int ai = 0; ai < n_algos; ++ai) {
      ResultRow row;
      row.algorithm = algorithms[ai];
      row.n = model.n;
      row.L = model.L;
      row.c = model.b_min;
      row.d = model.b_max;
      row.distribution = dist_name(model.latent);
      row.replication = rep + 1;
      row.seed = rep_seed;
      const auto t0 = std::chrono::steady_clock::now();
      if (!shared_error.empty()) {
        row.error = shared_error;
      } else {
        try {
          ResultRow scored = algorithms[ai] == "tensor"
                                 ? score_tensor(a, gt, model, rep_seed, threshold_mode, manual_t)
                                 : score_baseline(a, gt, model, rep_seed);
          row.r_bl = scored.r_bl;
          row.sin_theta_u = scored.sin_theta_u;
          row.sin_theta_w = scored.sin_theta_w;
          row.hooi_iters = scored.hooi_iters;
        } catch (const std::exception& e) {
          row.error = sanitize_error(e.what());
        }
      }
      row.wall_time_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
      rows[std::size_t(rep) * n_algos + ai] = std::move(row);
    }
  };

  const int pool = std::min(threads, replications);
  if (pool <= 1) {
    for (int rep = 0; rep < replications; ++rep) worker_body(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(pool);
    for (int w = 0; w < pool; ++w)
      workers.emplace_back([&]() {
        for (;;) {
          const int rep = next.fetch_add(1);
          if (rep >= replications) return;
          worker_body(rep);
        }
      });
    for (auto& w : workers) w.join();
  }
  return rows;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string csv_header_results() {
  return "algorithm,n,L,c,d,distribution,replication,seed,r_bl,"
         "sin_theta_u,sin_theta_w,hooi_iters,error";
}

namespace {
std::string csv_common(const ResultRow& r) {
  std::ostringstream ss;
  ss << r.algorithm << ',' << r.n << ',' << r.L << ',' << format_double(r.c) << ','
     << format_double(r.d) << ',' << r.distribution << ',' << r.replication << ','
     << r.seed << ',' << (r.r_bl ? format_double(*r.r_bl) : "") << ','
     << (r.sin_theta_u ? format_double(*r.sin_theta_u) : "") << ','
     << (r.sin_theta_w ? format_double(*r.sin_theta_w) : "") << ',' << r.hooi_iters;
  return ss.str();
}
}  // namespace

std::string csv_line_results(const ResultRow& r) {
  return csv_common(r) + ',' + r.error;
}

std::string csv_line_full(const ResultRow& r) {
  return csv_common(r) + ',' + format_double(r.wall_time_ms) + ',' + r.error;
}

ResultRow parse_checkpoint_line(const std::string& line) {
  const auto f = split_csv(line, 14);
  ResultRow r;
  r.algorithm = f[0];
  r.n = std::stoi(f[1]);
  r.L = std::stoi(f[2]);
  r.c = std::stod(f[3]);
  r.d = std::stod(f[4]);
  r.distribution = f[5];
  r.replication = std::stoi(f[6]);
  r.seed = std::stoull(f[7]);
  r.r_bl = parse_opt(f[8]);
  r.sin_theta_u = parse_opt(f[9]);
  r.sin_theta_w = parse_opt(f[10]);
  r.hooi_iters = std::stoi(f[11]);
  r.wall_time_ms = std::stod(f[12]);
  r.error = f[13];
  return r;
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  // Preserve first-appearance cell order.
  std::vector<SummaryRow> out;
  auto cell_of = [&](const ResultRow& r) -> SummaryRow& {
    for (auto& s : out)
      if (s.algorithm == r.algorithm && s.n == r.n && s.L == r.L) return s;
    out.push_back(SummaryRow{r.algorithm, r.n, r.L, 0, 0, {}, {}, {}, {}, {}});
    return out.back();
  };
  struct Acc {
    std::vector<double> r_bl, su, sw, iters;
  };
  std::vector<Acc> accs;
  for (const auto& r : rows) {
    SummaryRow& s = cell_of(r);
    const std::size_t at = std::size_t(&s - out.data());
    if (accs.size() <= at) accs.resize(out.size());
    ++s.replications;
    if (!r.error.empty()) {
      ++s.errors;
      continue;
    }
    if (r.r_bl) accs[at].r_bl.push_back(*r.r_bl);
    if (r.sin_theta_u) accs[at].su.push_back(*r.sin_theta_u);
    if (r.sin_theta_w) accs[at].sw.push_back(*r.sin_theta_w);
    accs[at].iters.push_back(double(r.hooi_iters));
  }
  auto mean_of = [](const std::vector<double>& v) -> std::optional<double> {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
  };
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].mean_r_bl = mean_of(accs[i].r_bl);
    out[i].mean_sin_theta_u = mean_of(accs[i].su);
    out[i].mean_sin_theta_w = mean_of(accs[i].sw);
    out[i].mean_hooi_iters = mean_of(accs[i].iters);
    if (out[i].mean_r_bl && accs[i].r_bl.size() > 1) {
      const double m = *out[i].mean_r_bl;
      double ss = 0.0;
      for (double x : accs[i].r_bl) ss += (x - m) * (x - m);
      out[i].stderr_r_bl = std::sqrt(ss / double(accs[i].r_bl.size() - 1) /
                                     double(accs[i].r_bl.size()));
    }
  }
  return out;
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_summary_csv: cannot open " + path);
  os << "algorithm,n,L,replications,errors,mean_r_bl,stderr_r_bl,"
        "mean_sin_theta_u,mean_sin_theta_w,mean_hooi_iters\n";
  auto opt = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  for (const auto& s : rows)
    os << s.algorithm << ',' << s.n << ',' << s.L << ',' << s.replications << ','
       << s.errors << ',' << opt(s.mean_r_bl) << ',' << opt(s.stderr_r_bl) << ','
       << opt(s.mean_sin_theta_u) << ',' << opt(s.mean_sin_theta_w) << ','
       << opt(s.mean_hooi_iters) << '\n';
}

std::vector<SummaryRow> load_summary_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_summary_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("load_summary_csv: empty file");
  std::vector<SummaryRow> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line, 10);
    SummaryRow s;
    s.algorithm = f[0];
    s.n = std::stoi(f[1]);
    s.L = std::stoi(f[2]);
    s.replications = std::stoi(f[3]);
    s.errors = std::stoi(f[4]);
    s.mean_r_bl = parse_opt(f[5]);
    s.stderr_r_bl = parse_opt(f[6]);
    s.mean_sin_theta_u = parse_opt(f[7]);
    s.mean_sin_theta_w = parse_opt(f[8]);
    s.mean_hooi_iters = parse_opt(f[9]);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::uint64_t bits_of(double v) { return std::bit_cast<std::uint64_t>(v); }

// Everything a cell's rows depend on goes into the checkpoint fingerprint, so
// a config change invalidates stale checkpoints.
std::uint64_t grid_fingerprint(const ExperimentGrid& grid, const ModelConfig& cell_model) {
  std::uint64_t h = mix_key(grid.base_seed,
                            {std::uint64_t(cell_model.n), std::uint64_t(cell_model.L),
                             std::uint64_t(grid.replications),
                             std::uint64_t(grid.threshold_mode), bits_of(grid.manual_t)});
  h = mix_key(h, {std::uint64_t(cell_model.M), bits_of(cell_model.b_min),
                  bits_of(cell_model.b_max), std::uint64_t(cell_model.latent.kind),
                  bits_of(cell_model.latent.sigma)});
  for (int k : cell_model.K) h = mix_key(h, {std::uint64_t(k)});
  for (double p : cell_model.pi) h = mix_key(h, {bits_of(p)});
  for (double wgt : cell_model.latent.weights) h = mix_key(h, {bits_of(wgt)});
  for (double al : cell_model.latent.alpha) h = mix_key(h, {bits_of(al)});
  for (const auto& a : grid.algorithms) h = mix_key(h, {a == "tensor" ? 1ULL : 2ULL});
  return h;
}

std::vector<ResultRow> load_checkpoint(const fs::path& file, std::uint64_t fingerprint,
                                       std::size_t expected_rows) {
  std::ifstream is(file);
  if (!is) return {};
  std::string line;
  if (!std::getline(is, line)) return {};
  if (line != "# cell " + std::to_string(fingerprint)) return {};
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      rows.push_back(parse_checkpoint_line(line));
    } catch (const std::exception&) {
      return {};
    }
  }
  if (rows.size() != expected_rows) return {};
  return rows;
}

void write_checkpoint(const fs::path& file, std::uint64_t fingerprint,
                      const std::vector<ResultRow>& rows) {
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("run_grid: cannot open " + tmp.string());
    os << "# cell " << fingerprint << '\n';
    for (const auto& r : rows) os << csv_line_full(r) << '\n';
  }
  fs::rename(tmp, file);
}

}  // namespace

int run_grid(const ExperimentGrid& grid) {
  grid.validate();
  const fs::path out_dir(grid.output_dir);
  fs::create_directories(out_dir / "cells");

  std::vector<ResultRow> all_rows;
  for (int value : grid.sweep.values) {
    ModelConfig cell_model = grid.model;
    cell_model.n = grid.sweep.axis == 'n' ? value : grid.sweep.fixed;
    cell_model.L = grid.sweep.axis == 'L' ? value : grid.sweep.fixed;

    const fs::path cell_file =
        out_dir / "cells" /
        ("cell_n" + std::to_string(cell_model.n) + "_L" + std::to_string(cell_model.L) + ".csv");
    const std::uint64_t fp = grid_fingerprint(grid, cell_model);
    const std::size_t expected = std::size_t(grid.replications) * grid.algorithms.size();

    std::vector<ResultRow> rows = load_checkpoint(cell_file, fp, expected);
    if (rows.empty()) {
      rows = run_cell(cell_model, grid.algorithms, grid.base_seed, grid.replications,
                      grid.threads, grid.threshold_mode, grid.manual_t);
      write_checkpoint(cell_file, fp, rows);
    }
    all_rows.insert(all_rows.end(), rows.begin(), rows.end());
  }

  int error_rows = 0;
  {
    std::ofstream results(out_dir / "results.csv");
    std::ofstream timings(out_dir / "timings.csv");
    if (!results || !timings)
      throw std::runtime_error("run_grid: cannot write output CSVs");
    results << csv_header_results() << '\n';
    timings << "algorithm,n,L,replication,wall_time_ms\n";
    for (const auto& r : all_rows) {
      results << csv_line_results(r) << '\n';
      timings << r.algorithm << ',' << r.n << ',' << r.L << ',' << r.replication << ','
              << format_double(r.wall_time_ms) << '\n';
      if (!r.error.empty()) ++error_rows;
    }
  }
  write_summary_csv(summarize(all_rows), (out_dir / "summary.csv").string());
  return error_rows;
}

namespace {

LatentSpec latent_from_json(const json& j) {
  LatentSpec spec;
  const std::string kind = j.value("dist", "truncated_normal");
  if (kind == "truncated_normal") {
    spec.kind = LatentDist::TruncatedNormal;
    spec.sigma = j.value("sigma", 1.0);
  } else if (kind == "multinomial_first_k") {
    spec.kind = LatentDist::MultinomialFirstK;
    spec.weights = j.at("weights").get<std::vector<double>>();
  } else if (kind == "dirichlet_first_k") {
    spec.kind = LatentDist::DirichletFirstK;
    spec.alpha = j.at("alpha").get<std::vector<double>>();
  } else {
    throw ConfigError("latent: unknown dist '" + kind + "'");
  }
  return spec;
}

}  // namespace

namespace {
ModelConfig model_from_json(const json& j);
}  // namespace

ModelConfig model_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: invalid JSON: ") + e.what());
  }
  try {
    ModelConfig m = model_from_json(j);
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model: missing or mistyped field: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

ModelConfig model_from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("model: cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return model_from_json_text(ss.str());
}

namespace {
ModelConfig model_from_json(const json& j) {
  ModelConfig m;
  m.n = j.value("n", 0);
  m.L = j.value("L", 0);
  m.M = j.at("M").get<int>();
  if (j.at("K").is_array())
    m.K = j.at("K").get<std::vector<int>>();
  else
    m.K.assign(std::size_t(m.M), j.at("K").get<int>());
  if (j.contains("pi")) m.pi = j.at("pi").get<std::vector<double>>();
  if (j.contains("latent")) m.latent = latent_from_json(j.at("latent"));
  const auto range = j.at("b_range").get<std::vector<double>>();
  if (range.size() != 2) throw ConfigError("model: b_range must be [c, d]");
  m.b_min = range[0];
  m.b_max = range[1];
  m.seed = j.value("seed", std::uint64_t(0));
  return m;
}
}  // namespace

ExperimentGrid grid_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grid: invalid JSON: ") + e.what());
  }
  try {
    ExperimentGrid g;
    const json& sweep = j.at("sweep");
    const std::string axis = sweep.at("axis").get<std::string>();
    if (axis != "n" && axis != "L") throw ConfigError("grid: sweep axis must be 'n' or 'L'");
    g.sweep.axis = axis[0];
    g.sweep.values = sweep.at("values").get<std::vector<int>>();
    g.sweep.fixed = axis == "n" ? sweep.at("fixed_L").get<int>() : sweep.at("fixed_n").get<int>();
    g.model = model_from_json(j.at("model"));
    g.algorithms = j.value("algorithms", std::vector<std::string>{"tensor", "baseline"});
    g.replications = j.value("replications", 20);
    g.base_seed = j.value("base_seed", std::uint64_t(0));
    g.output_dir = j.value("output_dir", std::string("out"));
    g.threads = j.value("threads", 1);
    if (j.contains("threshold")) {
      const json& t = j.at("threshold");
      const std::string mode = t.at("mode").get<std::string>();
      if (mode == "gap") {
        g.threshold_mode = ThresholdMode::GapAdaptive;
      } else if (mode == "formula") {
        g.threshold_mode = ThresholdMode::FormulaT;
      } else if (mode == "separation") {
        g.threshold_mode = ThresholdMode::Separation;
      } else if (mode == "manual") {
        g.threshold_mode = ThresholdMode::Manual;
        g.manual_t = t.at("T").get<double>();
      } else {
        throw ConfigError("grid: unknown threshold mode '" + mode + "'");
      }
    }
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grid: missing or mistyped field: ") + e.what());
  }
}

ExperimentGrid grid_from_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("grid: cannot open config file " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return grid_from_json_text(ss.str());
}

}  // namespace dimple
