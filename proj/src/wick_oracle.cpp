#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "pepslab/dense_tensor.hpp"
#include "pepslab/errors.hpp"
#include "pepslab/replica.hpp"
#include "pepslab/rng.hpp"

namespace pepslab {

double wick_dense_dimension(const ReplicaParams& p) {
  const double ket = std::pow(p.d, static_cast<double>(p.sites())) * std::pow(p.D, static_cast<double>(p.Lx));
  return std::max(ket, std::pow(p.D, 2.0 * static_cast<double>(p.Lx)));
}

namespace {

struct SiteShape {
  Shape shape;  // (s, l, u, r, d); pinned legs have extent 1
  bool self_trace = false;
};

struct Network {
  std::vector<SiteShape> sites;
  std::vector<std::vector<int>> labels;
  std::vector<int> open;
};

// Labels: physical legs 0..N-1, top legs 1000+x, horizontal bond 2000+r, vertical 3000+r,
// pinned legs 4000+.. (extent 1, contracted away by slicing).
Network build_network(const ReplicaParams& p) {
  const auto D = static_cast<std::size_t>(std::llround(p.D));
  const auto d = static_cast<std::size_t>(std::llround(p.d));
  Network net;
  const std::size_t Lx = p.Lx, Ly = p.Ly;
  for (std::size_t y = 0; y < Ly; ++y)
    for (std::size_t x = 0; x < Lx; ++x) {
      const std::size_t r = y * Lx + x;
      SiteShape s;
      const bool left = x > 0 || p.periodic_x;
      const bool right = x + 1 < Lx || p.periodic_x;
      const bool down = y + 1 < Ly;
      s.shape = {d, left ? D : 1, D, right ? D : 1, down ? D : 1};
      s.self_trace = p.periodic_x && Lx == 1;
      std::vector<int> l;
      l.push_back(static_cast<int>(r));
      const std::size_t xl = x > 0 ? x - 1 : Lx - 1;
      l.push_back(static_cast<int>(2000 + y * Lx + xl));  // bond to the left neighbour
      l.push_back(y == 0 ? static_cast<int>(1000 + x) : static_cast<int>(3000 + r - Lx));
      l.push_back(static_cast<int>(2000 + r));
      l.push_back(static_cast<int>(3000 + r));
      if (!left) l[1] = static_cast<int>(4000 + 4 * r);
      if (!right) l[3] = static_cast<int>(4000 + 4 * r + 1);
      if (!down) l[4] = static_cast<int>(4000 + 4 * r + 2);
      net.sites.push_back(s);
      net.labels.push_back(l);
    }
  for (std::size_t r = 0; r < p.sites(); ++r) net.open.push_back(static_cast<int>(r));
  for (std::size_t x = 0; x < Lx; ++x) net.open.push_back(static_cast<int>(1000 + x));
  return net;
}

// Ket network with physical and top legs open, each site tensor normalized.
MatrixXc sample_ket(const ReplicaParams& p, const Network& net, std::uint64_t stream) {
  std::vector<LabeledTensor> ts;
  for (std::size_t r = 0; r < net.sites.size(); ++r) {
    DenseTensor t = gaussian_tensor(net.sites[r].shape, derive_seed(stream, r));
    t *= Complex(1.0 / t.norm());
    std::vector<int> labels = net.labels[r];
    if (net.sites[r].self_trace) {
      // left and right legs of a single periodic column are the same bond
      const auto& sh = t.shape();
      DenseTensor tr(Shape{sh[0], sh[2], sh[4]});
      for (std::size_t s = 0; s < sh[0]; ++s)
        for (std::size_t u = 0; u < sh[2]; ++u)
          for (std::size_t dd = 0; dd < sh[4]; ++dd) {
            Complex acc = 0.0;
            for (std::size_t a = 0; a < sh[1]; ++a) acc += t({s, a, u, a, dd});
            tr({s, u, dd}) = acc;
          }
      t = std::move(tr);
      labels = {labels[0], labels[2], labels[4]};
    }
    // drop pinned legs (extent 1, index 0)
    for (std::size_t ax = t.rank(); ax-- > 1;)
      if (labels[ax] >= 4000) {
        t = t.slice(ax, 0);
        labels.erase(labels.begin() + static_cast<std::ptrdiff_t>(ax));
      }
    ts.push_back({std::move(t), std::move(labels)});
  }
  DenseTensor phi = contract_network(std::move(ts), net.open);
  const auto top = static_cast<Eigen::Index>(std::llround(std::pow(p.D, static_cast<double>(p.Lx))));
  return phi.reshaped({phi.size() / static_cast<std::size_t>(top), static_cast<std::size_t>(top)}).to_matrix();
}

}  // namespace

WickEstimate wick_oracle_mc(const ReplicaParams& p, std::size_t samples, std::uint64_t seed, int jobs) {
  p.validate();
  if (samples < 2) throw DomainError("wick_oracle_mc: need at least two samples");
  if (std::abs(p.D - std::round(p.D)) > 0 || std::abs(p.d - std::round(p.d)) > 0)
    throw DomainError("wick_oracle_mc: D and d must be integers");
  const double dim = wick_dense_dimension(p);
  if (dim > kWickDenseBudget) {
    std::ostringstream os;
    os << "wick_oracle_mc: dense dimension " << dim << " exceeds the budget of " << kWickDenseBudget;
    throw BudgetExceededError(os.str(), dim);
  }
  const Network net = build_network(p);
  const int Q = p.Q();
  const std::size_t Lx = p.Lx;
  const auto D = static_cast<std::size_t>(std::llround(p.D));

  // (tr rho_A^n)^m scales as prod_r |T_r|^{4Q}, and |T_r|^2 ~ Gamma(dim_r) is
  // independent of the direction, so the radial moments are applied exactly.
  double log_radial = 0.0;
  for (const auto& s : net.sites) {
    const auto k = static_cast<double>(shape_size(s.shape));
    log_radial += std::lgamma(k + 2.0 * Q) - std::lgamma(k);
  }

  std::vector<char> inA(Lx, 0);
  for (std::size_t x : p.region) inA[x] = 1;
  // sigma axes (a_0..a_{L-1}, a'_0..a'_{L-1}) regrouped as (A ket, A bra | rest)
  Axes perm;
  std::size_t nA = 0;
  for (int bra = 0; bra < 2; ++bra)
    for (std::size_t x = 0; x < Lx; ++x)
      if (inA[x]) perm.push_back(bra * Lx + x), ++nA;
  for (int bra = 0; bra < 2; ++bra)
    for (std::size_t x = 0; x < Lx; ++x)
      if (!inA[x]) perm.push_back(bra * Lx + x);

  std::vector<double> xA(samples), x0(samples);
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const MatrixXc P = sample_ket(p, net, derive_seed(seed, i));
      const MatrixXc sigma = P.transpose() * P.conjugate();
      const double norm2 = sigma.squaredNorm();
      x0[i] = std::pow(norm2, Q);
      std::vector<Complex> buf(static_cast<std::size_t>(sigma.size()));
      Eigen::Map<RowMatrixXc>(buf.data(), sigma.rows(), sigma.cols()) = sigma;
      DenseTensor st(Shape(2 * Lx, D), std::move(buf));
      const MatrixXc M = st.permuted(perm).matrix(nA);
      const MatrixXc rhoA = M * M.adjoint();
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<MatrixXc>(rhoA, Eigen::EigenvaluesOnly).eigenvalues();
      double trn = 0.0;
      for (double l : ev) trn += std::pow(std::max(l, 0.0), p.n);
      xA[i] = std::pow(trn, p.m);
    }
  };
  const std::size_t J = static_cast<std::size_t>(std::max(1, jobs));
  if (J == 1) {
    work(0, samples);
  } else {
    std::vector<std::thread> th;
    for (std::size_t j = 0; j < J; ++j) th.emplace_back(work, samples * j / J, samples * (j + 1) / J);
    for (auto& t : th) t.join();
  }

  WickEstimate est;
  est.samples = samples;
  const double scale = std::exp(log_radial);
  const auto a = jackknife_mean(xA), z = jackknife_mean(x0);
  est.mean_A = a.estimate * scale;
  est.se_A = a.se * scale;
  est.mean_0 = z.estimate * scale;
  est.se_0 = z.se * scale;
  const auto lr = jackknife_ratio_log(xA, x0);
  est.log_ratio = lr.estimate;
  est.log_ratio_se = lr.se;
  return est;
}

}  // namespace pepslab
