// Exact partition functions through the character expansion
//   D^{C(s)} = sum_lambda s_lambda(D) chi_lambda(s),
// with chi_lambda(g^{-1} h) = sum_ab rho(g)_ab rho(h)_ab for Young's orthogonal
// form. Every bond becomes a contraction over the feature index (lambda, a, b)
// and every spin sum becomes a site tensor sum_g w(g) prod_legs rho(g).

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "pepslab/dense_tensor.hpp"
#include "pepslab/errors.hpp"
#include "replica_detail.hpp"

namespace pepslab {

namespace schur_weyl {

namespace {

void partitions_rec(int left, int max_part, Partition& cur, std::vector<Partition>& out) {
  if (left == 0) {
    out.push_back(cur);
    return;
  }
  for (int k = std::min(left, max_part); k >= 1; --k) {
    cur.push_back(k);
    partitions_rec(left - k, k, cur, out);
    cur.pop_back();
  }
}

int hook(const Partition& lambda, int row, int col) {
  int below = 0;
  for (std::size_t r = static_cast<std::size_t>(row) + 1; r < lambda.size() && lambda[r] > col; ++r) ++below;
  return lambda[static_cast<std::size_t>(row)] - col - 1 + below + 1;
}

// Standard Young tableaux as (row, col) of every entry 0..N-1.
struct Tableaux {
  std::vector<std::vector<int>> row, col;
};

void syt_rec(const Partition& lambda, std::vector<int>& fill, std::vector<int>& r, std::vector<int>& c, int next,
             int N, Tableaux& out) {
  if (next == N) {
    out.row.push_back(r);
    out.col.push_back(c);
    return;
  }
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    if (fill[i] >= lambda[i]) continue;
    if (i > 0 && fill[i] >= fill[i - 1]) continue;
    r[static_cast<std::size_t>(next)] = static_cast<int>(i);
    c[static_cast<std::size_t>(next)] = fill[i];
    ++fill[i];
    syt_rec(lambda, fill, r, c, next + 1, N, out);
    --fill[i];
  }
}

Tableaux standard_tableaux(const Partition& lambda) {
  int N = 0;
  for (int v : lambda) N += v;
  Tableaux t;
  std::vector<int> fill(lambda.size(), 0), r(static_cast<std::size_t>(N)), c(static_cast<std::size_t>(N));
  syt_rec(lambda, fill, r, c, 0, N, t);
  return t;
}

// Action of s_i = (i i+1) on the tableau basis: column T has `diag` at T and
// `off` at partner T' (partner < 0 when absent).
struct Generator {
  std::vector<int> partner;
  std::vector<double> diag, off;
};

std::vector<Generator> generators(const Partition& lambda, const Tableaux& tab) {
  int N = 0;
  for (int v : lambda) N += v;
  const std::size_t dim = tab.row.size();
  std::map<std::pair<std::vector<int>, std::vector<int>>, int> index;
  for (std::size_t t = 0; t < dim; ++t) index[{tab.row[t], tab.col[t]}] = static_cast<int>(t);
  std::vector<Generator> gens(static_cast<std::size_t>(std::max(N - 1, 0)));
  for (int i = 0; i + 1 < N; ++i) {
    Generator& g = gens[static_cast<std::size_t>(i)];
    g.partner.assign(dim, -1);
    g.diag.assign(dim, 0.0);
    g.off.assign(dim, 0.0);
    const auto a = static_cast<std::size_t>(i), b = a + 1;
    for (std::size_t t = 0; t < dim; ++t) {
      const auto& r = tab.row[t];
      const auto& c = tab.col[t];
      const int axial = (c[b] - r[b]) - (c[a] - r[a]);
      g.diag[t] = 1.0 / axial;
      if (r[a] != r[b] && c[a] != c[b]) {
        auto r2 = r, c2 = c;
        std::swap(r2[a], r2[b]);
        std::swap(c2[a], c2[b]);
        g.partner[t] = index.at({r2, c2});
        g.off[t] = std::sqrt(1.0 - 1.0 / (static_cast<double>(axial) * axial));
      }
    }
  }
  return gens;
}

}  // namespace

std::vector<Partition> partitions(int N) {
  std::vector<Partition> out;
  Partition cur;
  partitions_rec(N, N, cur, out);
  return out;
}

std::size_t irrep_dimension(const Partition& lambda) {
  int N = 0;
  for (int v : lambda) N += v;
  double f = factorial(N);
  for (std::size_t r = 0; r < lambda.size(); ++r)
    for (int c = 0; c < lambda[r]; ++c) f /= hook(lambda, static_cast<int>(r), c);
  return static_cast<std::size_t>(std::llround(f));
}

double schur_dimension(const Partition& lambda, double D) {
  double s = 1.0;
  for (std::size_t r = 0; r < lambda.size(); ++r)
    for (int c = 0; c < lambda[r]; ++c) s *= (D + c - static_cast<double>(r)) / hook(lambda, static_cast<int>(r), c);
  return s;
}

Eigen::MatrixXd orthogonal_form(const Partition& lambda, const Permutation& g) {
  const Tableaux tab = standard_tableaux(lambda);
  const auto gens = generators(lambda, tab);
  const auto dim = static_cast<Eigen::Index>(tab.row.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(dim, dim);
  // peel right factors: g = h s_i whenever g has a descent at i
  Permutation h = g;
  for (;;) {
    std::size_t i = 0;
    while (i + 1 < h.size() && h.images[i] < h.images[i + 1]) ++i;
    if (i + 1 >= h.size()) break;
    std::swap(h.images[i], h.images[i + 1]);
    const Generator& s = gens[i];
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index t = 0; t < dim; ++t) {
      S(t, t) = s.diag[static_cast<std::size_t>(t)];
      if (s.partner[static_cast<std::size_t>(t)] >= 0) S(s.partner[static_cast<std::size_t>(t)], t) = s.off[static_cast<std::size_t>(t)];
    }
    M = S * M;
  }
  return M;
}

}  // namespace schur_weyl

namespace detail {

namespace {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kFeatureEntries = 6e7;
constexpr double kTensorEntries = 4194304.0;

bool integer_dimension(double D) { return D >= 1.0 && D <= 8.0 && std::abs(D - std::round(D)) < 1e-12; }

std::vector<schur_weyl::Partition> kept_partitions(int N, double D) {
  std::vector<schur_weyl::Partition> out;
  for (auto& l : schur_weyl::partitions(N))
    if (static_cast<double>(l.size()) <= D) out.push_back(l);
  return out;
}

std::size_t feature_count(int N, double D) {
  std::size_t F = 0;
  for (auto& l : kept_partitions(N, D)) {
    const std::size_t dl = schur_weyl::irrep_dimension(l);
    F += dl * dl;
  }
  return F;
}

// Row g: entries of rho_lambda(g) times sqrt(s_lambda(D) / D^N), all kept lambda.
struct Features {
  int N = 0;
  double D = 0.0;
  RowMatrixXd U;
};

Features build_features(int N, double D) {
  const auto lambdas = kept_partitions(N, D);
  std::vector<std::vector<schur_weyl::Generator>> gens;
  std::vector<std::size_t> dims, offsets;
  std::vector<double> scale;
  std::size_t F = 0;
  for (const auto& l : lambdas) {
    const auto tab = schur_weyl::standard_tableaux(l);
    gens.push_back(schur_weyl::generators(l, tab));
    dims.push_back(tab.row.size());
    offsets.push_back(F);
    F += tab.row.size() * tab.row.size();
    scale.push_back(std::sqrt(schur_weyl::schur_dimension(l, D) / std::pow(D, N)));
  }
  const auto G = static_cast<std::size_t>(std::llround(factorial(N)));
  Features f{N, D, RowMatrixXd::Zero(static_cast<Eigen::Index>(G), static_cast<Eigen::Index>(F))};
  std::vector<char> done(G, 0);
  // identity rows
  for (std::size_t k = 0; k < lambdas.size(); ++k)
    for (std::size_t a = 0; a < dims[k]; ++a) f.U(0, static_cast<Eigen::Index>(offsets[k] + a * dims[k] + a)) = 1.0;
  done[0] = 1;
  std::vector<std::size_t> queue{0};
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const std::size_t g = queue[qi];
    const Permutation pg = permutation_unrank(static_cast<std::size_t>(N), g);
    for (int i = 0; i + 1 < N; ++i) {
      Permutation ps = pg;
      // g * s_i swaps the images at positions i and i+1
      std::swap(ps.images[static_cast<std::size_t>(i)], ps.images[static_cast<std::size_t>(i) + 1]);
      const auto r = static_cast<std::size_t>(permutation_rank(ps));
      if (done[r]) continue;
      done[r] = 1;
      queue.push_back(r);
      for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const auto& s = gens[k][static_cast<std::size_t>(i)];
        const std::size_t dl = dims[k], off = offsets[k];
        // (M S)[a, t] = M[a, t] diag[t] + M[a, t'] off[t']  (S symmetric)
        for (std::size_t a = 0; a < dl; ++a)
          for (std::size_t t = 0; t < dl; ++t) {
            double v = f.U(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(off + a * dl + t)) * s.diag[t];
            if (s.partner[t] >= 0)
              v += f.U(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(off + a * dl + static_cast<std::size_t>(s.partner[t]))) *
                   s.off[t];
            f.U(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(off + a * dl + t)) = v;
          }
      }
    }
  }
  for (std::size_t k = 0; k < lambdas.size(); ++k) {
    const std::size_t w = dims[k] * dims[k];
    f.U.middleCols(static_cast<Eigen::Index>(offsets[k]), static_cast<Eigen::Index>(w)) *= scale[k];
  }
  return f;
}

const Features& cached_features(int N, double D) {
  static std::mutex mu;
  static Features cache;
  std::lock_guard<std::mutex> lock(mu);
  if (cache.N != N || cache.D != D) {
    cache = Features{};
    cache = build_features(N, D);
  }
  return cache;
}

std::vector<std::size_t> site_degrees(const ReplicaParams& p) {
  std::vector<std::size_t> deg(p.sites(), 0);
  for (auto [a, b] : replica_bonds(p))
    if (a != b) {
      ++deg[a];
      ++deg[b];
    }
  return deg;
}

// sum_g w(g) prod_{j<k} U[g, a_j], row-major over (a_1 .. a_k).
DenseTensor site_tensor(const RowMatrixXd& U, const std::vector<double>& w, std::size_t k) {
  const auto G = static_cast<Eigen::Index>(U.rows());
  const auto F = static_cast<Eigen::Index>(U.cols());
  if (k == 0) {
    double s = 0.0;
    for (double v : w) s += v;
    return DenseTensor::scalar(s);
  }
  Eigen::Index lead = 1;
  for (std::size_t j = 1; j < k; ++j) lead *= F;
  RowMatrixXd T = RowMatrixXd::Zero(lead, F);
  const Eigen::Index block = 2048;
  RowMatrixXd K(block, lead);
  for (Eigen::Index g0 = 0; g0 < G; g0 += block) {
    const Eigen::Index b = std::min(block, G - g0);
    for (Eigen::Index i = 0; i < b; ++i) {
      // Khatri-Rao row: w(g) U[g,:] x ... x U[g,:]  (k-1 factors)
      K(i, 0) = w[static_cast<std::size_t>(g0 + i)];
      Eigen::Index len = 1;
      for (std::size_t j = 1; j < k; ++j) {
        for (Eigen::Index p = len - 1; p >= 0; --p) {
          const double v = K(i, p);
          for (Eigen::Index a = F - 1; a >= 0; --a) K(i, p * F + a) = v * U(g0 + i, a);
        }
        len *= F;
      }
    }
    T.noalias() += K.topRows(b).transpose() * U.middleRows(g0, b);
  }
  Shape shape(k, static_cast<std::size_t>(F));
  std::vector<Complex> data(static_cast<std::size_t>(T.size()));
  for (Eigen::Index i = 0; i < T.size(); ++i) data[static_cast<std::size_t>(i)] = T.data()[i];
  return DenseTensor(shape, std::move(data));
}

}  // namespace

std::optional<double> character_cost(const ReplicaParams& p) {
  const int N = 2 * p.Q();
  if (N > 10 || !integer_dimension(p.D)) return std::nullopt;
  const double G = factorial(N);
  const auto F = static_cast<double>(feature_count(N, std::round(p.D)));
  if (G * F > kFeatureEntries) return std::nullopt;
  double cost = G * F * 2.0;
  for (std::size_t k : site_degrees(p)) {
    const double entries = std::pow(F, static_cast<double>(k));
    if (entries > kTensorEntries) return std::nullopt;
    cost += 2.0 * G * std::max(entries, 1.0);
  }
  if (cost > kCharacterBudget) return std::nullopt;
  return cost;
}

double character_log_partition(const ReplicaParams& p, Variant v) {
  const int N = 2 * p.Q();
  const double D = std::round(p.D);
  const Features& f = cached_features(N, D);
  const auto group = all_permutations(static_cast<std::size_t>(N));
  const BoundaryPerms b = boundary_perms(p.n, p.m);
  const auto deg = site_degrees(p);

  double logZ = 0.0;
  std::vector<LabeledTensor> net;
  std::vector<std::vector<int>> labels(p.sites());
  const auto bonds = replica_bonds(p);
  for (std::size_t e = 0; e < bonds.size(); ++e) {
    const auto [a, c] = bonds[e];
    if (a == c) {
      logZ += p.J() * N;  // C(g, g) = 2Q
      continue;
    }
    logZ += p.J() * N;  // features carry D^{C - 2Q}
    labels[a].push_back(static_cast<int>(e));
    labels[c].push_back(static_cast<int>(e));
  }
  for (std::size_t r = 0; r < p.sites(); ++r) {
    auto w = site_log_field(p, b, v, r, group);
    const double shift = *std::max_element(w.begin(), w.end());
    for (auto& x : w) x = std::exp(x - shift);
    logZ += shift;
    net.push_back({site_tensor(f.U, w, deg[r]), labels[r]});
  }
  const DenseTensor z = contract_network(std::move(net), {});
  const double re = z.ptr()[0].real();
  if (!(re > 0.0) || std::abs(z.ptr()[0].imag()) > 1e-9 * re)
    throw Error("exact_partition: character expansion lost precision");
  return logZ + std::log(re);
}

}  // namespace detail

}  // namespace pepslab
