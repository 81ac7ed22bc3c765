#include "dimple/netgen.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dimple {

namespace {
// Substream tags under a model seed.
constexpr std::uint64_t kTagLabels = 1;
constexpr std::uint64_t kTagLatent = 2;
constexpr std::uint64_t kTagLoading = 3;
constexpr std::uint64_t kTagAdjacency = 4;

void check_probabilities(const std::vector<double>& pi) {
  if (pi.empty()) throw std::invalid_argument("probability vector is empty");
  double sum = 0.0;
  for (double p : pi) {
    if (!(p > 0.0)) throw std::invalid_argument("probabilities must be positive");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("probabilities must sum to 1");
}
}  // namespace

int ModelConfig::max_k() const {
  int k = 0;
  for (int km : K) k = std::max(k, km);
  return k;
}

void ModelConfig::validate() const {
  if (n < 2) throw std::invalid_argument("ModelConfig: n must be >= 2");
  if (L < 1) throw std::invalid_argument("ModelConfig: L must be >= 1");
  if (M < 1) throw std::invalid_argument("ModelConfig: M must be >= 1");
  if (int(K.size()) != M)
    throw std::invalid_argument("ModelConfig: K must have one entry per group");
  for (int km : K)
    if (km < 1) throw std::invalid_argument("ModelConfig: K_m must be >= 1");
  if (!pi.empty()) {
    if (int(pi.size()) != M)
      throw std::invalid_argument("ModelConfig: pi must have one entry per group");
    check_probabilities(pi);
  }
  if (b_min > b_max)
    throw std::invalid_argument("ModelConfig: b_range must have c <= d");
  switch (latent.kind) {
    case LatentDist::TruncatedNormal:
      if (!(latent.sigma > 0.0) && latent.cov.size() == 0)
        throw std::invalid_argument("ModelConfig: sigma must be > 0");
      break;
    case LatentDist::MultinomialFirstK:
      break;  // weights are checked against K at sampling time
    case LatentDist::DirichletFirstK:
      break;
  }
}

LayerLabels sample_labels(const std::vector<double>& pi, int L, Rng& rng) {
  check_probabilities(pi);
  if (L < 1) throw std::invalid_argument("sample_labels: L must be >= 1");
  LayerLabels out;
  out.M = int(pi.size());
  out.s.resize(L);
  for (int l = 0; l < L; ++l) out.s[l] = rng.categorical(pi) + 1;
  return out;
}

Matrix sample_latent(const LatentSpec& spec, int n, int K, Rng& rng) {
  if (n < 1 || K < 1) throw std::invalid_argument("sample_latent: bad dims");
  Matrix x(n, K);
  switch (spec.kind) {
    case LatentDist::TruncatedNormal: {
      Matrix chol;
      if (spec.cov.size() > 0) {
        if (spec.cov.rows() != K || spec.cov.cols() != K)
          throw std::invalid_argument("sample_latent: covariance must be K x K");
        Eigen::LLT<Matrix> llt(spec.cov);
        if (llt.info() != Eigen::Success)
          throw std::invalid_argument("sample_latent: covariance not positive definite");
        chol = llt.matrixL();
      }
      for (int i = 0; i < n; ++i) {
        Vector eta(K);
        for (int k = 0; k < K; ++k) eta(k) = rng.normal();
        if (chol.size() > 0)
          eta = chol * eta;
        else
          eta *= spec.sigma;
        double norm = eta.norm();
        while (norm == 0.0) {  // zero draw has probability zero; regenerate
          for (int k = 0; k < K; ++k) eta(k) = rng.normal();
          norm = eta.norm();
        }
        x.row(i) = eta.transpose() / norm;
      }
      break;
    }
    case LatentDist::MultinomialFirstK: {
      if (int(spec.weights.size()) != K + 1)
        throw std::invalid_argument("sample_latent: weights must have K+1 entries");
      check_probabilities(spec.weights);
      x.setZero();
      for (int i = 0; i < n; ++i) {
        const int c = rng.categorical(spec.weights);
        if (c < K) x(i, c) = 1.0;  // category K+1 leaves a zero row
      }
      break;
    }
    case LatentDist::DirichletFirstK: {
      if (int(spec.alpha.size()) != K + 1)
        throw std::invalid_argument("sample_latent: alpha must have K+1 entries");
      for (double a : spec.alpha)
        if (!(a > 0.0)) throw std::invalid_argument("sample_latent: alpha must be positive");
      for (int i = 0; i < n; ++i) {
        const std::vector<double> d = rng.dirichlet(spec.alpha);
        for (int k = 0; k < K; ++k) x(i, k) = d[k];
      }
      break;
    }
  }
  return x;
}

Matrix sample_loading(int K, double c, double d, Rng& rng) {
  if (K < 1) throw std::invalid_argument("sample_loading: K must be >= 1");
  if (c > d) throw std::invalid_argument("sample_loading: need c <= d");
  Matrix b(K, K);
  for (int k1 = 0; k1 < K; ++k1)
    for (int k2 = k1; k2 < K; ++k2) {
      const double v = (c == d) ? c : rng.uniform(c, d);
      b(k1, k2) = v;
      b(k2, k1) = v;
    }
  return b;
}

GroundTruth build_ground_truth(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<double> pi = cfg.pi;
  if (pi.empty()) pi.assign(cfg.M, 1.0 / cfg.M);

  GroundTruth gt{Tensor3(cfg.n, cfg.n, cfg.L), {}, {}, {}};

  Rng label_rng(cfg.seed, {kTagLabels});
  gt.labels = sample_labels(pi, cfg.L, label_rng);

  gt.X.reserve(cfg.M);
  for (int m = 0; m < cfg.M; ++m) {
    Rng xr(cfg.seed, {kTagLatent, std::uint64_t(m)});
    gt.X.push_back(sample_latent(cfg.latent, cfg.n, cfg.K[m], xr));
  }

  gt.B.reserve(cfg.L);
  for (int l = 0; l < cfg.L; ++l) {
    const int m = gt.labels.s[l] - 1;
    Rng br(cfg.seed, {kTagLoading, std::uint64_t(l)});
    gt.B.push_back(sample_loading(cfg.K[m], cfg.b_min, cfg.b_max, br));

    const Matrix& x = gt.X[m];
    Matrix p = x * gt.B[l] * x.transpose();
    p = 0.5 * (p + p.transpose());  // exact symmetry
    p.diagonal().setZero();
    const double amax = p.cwiseAbs().maxCoeff();
    if (amax > 1.0) {
      std::ostringstream ss;
      ss << "build_ground_truth: |P| = " << amax << " > 1 in layer " << l + 1
         << "; the configuration is infeasible";
      throw std::invalid_argument(ss.str());
    }
    gt.P.slice(l) = p;
  }
  return gt;
}

Tensor3 population_probability(const GroundTruth& gt) {
  const int n = int(gt.X.at(0).rows());
  const int L = gt.labels.L();
  Tensor3 p(n, n, L);
  for (int l = 0; l < L; ++l) {
    const Matrix& x = gt.X[gt.labels.s[l] - 1];
    Matrix slice = x * gt.B[l] * x.transpose();
    p.slice(l) = 0.5 * (slice + slice.transpose());
  }
  return p;
}

Tensor3 sample_adjacency(const Tensor3& p, std::uint64_t seed) {
  const int n = p.n1();
  if (p.n2() != n)
    throw std::invalid_argument("sample_adjacency: slices must be square");
  if (p.size() > 0) {
    const double amax = Eigen::Map<const Vector>(p.data(), p.size()).cwiseAbs().maxCoeff();
    if (amax > 1.0)
      throw std::invalid_argument("sample_adjacency: |P| must be <= 1");
  }
  Tensor3 a(n, n, p.n3());
  for (int l = 0; l < p.n3(); ++l) {
    Rng rng(seed, {kTagAdjacency, std::uint64_t(l)});
    auto ps = p.slice(l);
    auto as = a.slice(l);
    for (int j = 1; j < n; ++j)
      for (int i = 0; i < j; ++i) {
        const double prob = std::abs(ps(i, j));
        const double u = rng.uniform01();
        if (u < prob) {
          const double v = ps(i, j) > 0 ? 1.0 : -1.0;
          as(i, j) = v;
          as(j, i) = v;
        }
      }
  }
  return a;
}

double estimate_sparsity(const Tensor3& a) {
  const int n = a.n1();
  if (a.n2() != n)
    throw std::invalid_argument("estimate_sparsity: slices must be square");
  if (n < 2) return 0.0;
  double count = 0.0;
  for (int l = 0; l < a.n3(); ++l) {
    auto s = a.slice(l);
    for (int j = 1; j < n; ++j)
      for (int i = 0; i < j; ++i) count += std::abs(s(i, j));
  }
  return 2.0 * count / (double(n) * (n - 1) * a.n3());
}

void save_labels_csv(const LayerLabels& labels, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("save_labels_csv: cannot open " + path);
  os << "layer,group\n";
  for (int l = 0; l < labels.L(); ++l) os << l + 1 << ',' << labels.s[l] << '\n';
}

LayerLabels load_labels_csv(const std::string& path, int M) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_labels_csv: cannot open " + path);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("load_labels_csv: empty file");
  LayerLabels out;
  out.M = M;
  int expected_layer = 1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int layer = 0, group = 0;
    if (std::sscanf(line.c_str(), "%d,%d", &layer, &group) != 2 ||
        layer != expected_layer || group < 1 || group > M)
      throw std::runtime_error("load_labels_csv: malformed line: " + line);
    out.s.push_back(group);
    ++expected_layer;
  }
  return out;
}

void save_prob_dump(const Tensor3& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_prob_dump: cannot open " + path);
  const char magic[8] = {'D', 'M', 'P', 'L', 'P', 'T', '0', '1'};
  os.write(magic, 8);
  const std::uint64_t dims[3] = {std::uint64_t(p.n1()), std::uint64_t(p.n2()),
                                 std::uint64_t(p.n3())};
  os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  os.write(reinterpret_cast<const char*>(p.data()),
           std::streamsize(p.size() * sizeof(double)));
  if (!os) throw std::runtime_error("save_prob_dump: write failed");
}

Tensor3 load_prob_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_prob_dump: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string(magic, 8) != "DMPLPT01")
    throw std::runtime_error("load_prob_dump: bad magic");
  std::uint64_t dims[3];
  is.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!is) throw std::runtime_error("load_prob_dump: truncated header");
  Tensor3 p{static_cast<int>(dims[0]), static_cast<int>(dims[1]),
            static_cast<int>(dims[2])};
  is.read(reinterpret_cast<char*>(p.data()),
          std::streamsize(p.size() * sizeof(double)));
  if (!is) throw std::runtime_error("load_prob_dump: truncated data");
  return p;
}

}  // namespace dimple
