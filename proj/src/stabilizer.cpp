#include "pepslab/stabilizer.hpp"

#include <algorithm>
#include <numeric>

#include "pepslab/errors.hpp"
#include "pepslab/rng.hpp"

namespace pepslab {

namespace {

int mod(long long a, int m) {
  const long long r = a % m;
  return static_cast<int>(r < 0 ? r + m : r);
}

int inverse_mod(int a, int p) {
  // Fermat; p is prime
  long long r = 1, b = mod(a, p);
  for (int e = p - 2; e > 0; e >>= 1) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
  }
  return static_cast<int>(r);
}

void check_prime(int p) {
  if (!is_prime(p)) throw DomainError("qudit dimension must be prime, got " + std::to_string(p));
}

// Row-reduces m (rows x cols, entries mod p) in place, returns the pivot columns.
std::vector<std::size_t> rref(std::vector<int>& m, std::size_t rows, std::size_t cols, int p) {
  std::vector<std::size_t> piv;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t s = r;
    while (s < rows && m[s * cols + c] == 0) ++s;
    if (s == rows) continue;
    if (s != r)
      for (std::size_t k = 0; k < cols; ++k) std::swap(m[s * cols + k], m[r * cols + k]);
    const int inv = inverse_mod(m[r * cols + c], p);
    for (std::size_t k = c; k < cols; ++k) m[r * cols + k] = m[r * cols + k] * inv % p;
    for (std::size_t i = 0; i < rows; ++i) {
      const int f = m[i * cols + c];
      if (i == r || f == 0) continue;
      for (std::size_t k = c; k < cols; ++k) m[i * cols + k] = mod(m[i * cols + k] - f * m[r * cols + k], p);
    }
    piv.push_back(c);
    ++r;
  }
  return piv;
}

std::size_t rank_mod(std::vector<int> m, std::size_t rows, std::size_t cols, int p) {
  return rref(m, rows, cols, p).size();
}

void check_same_p(const QuditPauli& a, const QuditPauli& b) {
  if (a.p != b.p || a.size() != b.size()) throw DimensionError("Pauli operators on different spaces");
}

using Functional = std::vector<std::pair<std::size_t, int>>;  // (column, coefficient)

// Keeps the subgroup on which f vanishes. Returns false if f already vanished on every generator.
bool restrict_to_kernel(StabilizerTableau& t, const Functional& f) {
  const int p = t.p();
  const std::size_t n = t.n_qudits();
  const auto& rows = t.raw_rows();
  auto value = [&](std::size_t k) {
    long long v = 0;
    for (const auto& [c, a] : f) v += static_cast<long long>(a) * rows[k * 2 * n + c];
    return mod(v, p);
  };
  const std::size_t r = t.n_generators();
  std::size_t piv = r;
  int pv = 0;
  for (std::size_t k = 0; k < r; ++k) {
    pv = value(k);
    if (pv != 0) {
      piv = k;
      break;
    }
  }
  if (piv == r) return false;
  const int inv = inverse_mod(pv, p);
  for (std::size_t k = piv + 1; k < r; ++k) {
    const int v = value(k);
    if (v != 0) t.multiply_row(k, piv, mod(-static_cast<long long>(v) * inv, p));
  }
  t.swap_rows(piv, r - 1);
  t.erase_row(r - 1);
  return true;
}

void check_qudit(const StabilizerTableau& t, std::size_t q) {
  if (q >= t.n_qudits()) throw DimensionError("qudit index out of range");
}

// Drops the measured columns and, when a dependency is possible, row-reduces.
std::optional<StabilizerTableau> finish_removal(StabilizerTableau t, const std::vector<std::size_t>& qudits,
                                                bool was_pure) {
  t.erase_qudits(qudits);
  if (!was_pure || t.n_generators() > t.n_qudits()) {
    if (!t.reduce()) return std::nullopt;
  }
  return t;
}

std::vector<std::size_t> distinct_sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  if (std::adjacent_find(v.begin(), v.end()) != v.end()) throw DimensionError("qudits must be distinct");
  return v;
}

}  // namespace

bool is_prime(long p) {
  if (p < 2) return false;
  for (long d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

int phase_modulus(int p) { return p == 2 ? 4 : p; }

bool QuditPauli::is_identity() const {
  return std::all_of(x.begin(), x.end(), [](int v) { return v == 0; }) &&
         std::all_of(z.begin(), z.end(), [](int v) { return v == 0; });
}

QuditPauli QuditPauli::identity(int p, std::size_t n) {
  QuditPauli q;
  q.p = p;
  q.x.assign(n, 0);
  q.z.assign(n, 0);
  return q;
}

QuditPauli QuditPauli::x_on(int p, std::size_t n, std::size_t q, int power) {
  QuditPauli r = identity(p, n);
  r.x.at(q) = mod(power, p);
  return r;
}

QuditPauli QuditPauli::z_on(int p, std::size_t n, std::size_t q, int power) {
  QuditPauli r = identity(p, n);
  r.z.at(q) = mod(power, p);
  return r;
}

int symplectic_form(const QuditPauli& a, const QuditPauli& b) {
  check_same_p(a, b);
  long long s = 0;
  for (std::size_t q = 0; q < a.size(); ++q) s += a.x[q] * b.z[q] - a.z[q] * b.x[q];
  return mod(s, a.p);
}

QuditPauli operator*(const QuditPauli& a, const QuditPauli& b) {
  check_same_p(a, b);
  const int p = a.p, K = phase_modulus(p);
  QuditPauli r = QuditPauli::identity(p, a.size());
  long long zx = 0;
  for (std::size_t q = 0; q < a.size(); ++q) {
    zx += a.z[q] * b.x[q];
    r.x[q] = (a.x[q] + b.x[q]) % p;
    r.z[q] = (a.z[q] + b.z[q]) % p;
  }
  r.phase = mod(a.phase + b.phase + static_cast<long long>(K / p) * mod(zx, p), K);
  return r;
}

QuditPauli power(const QuditPauli& a, long k) {
  const int K = phase_modulus(a.p);
  QuditPauli r = QuditPauli::identity(a.p, a.size());
  // g^K = I for every Pauli in this convention
  for (long i = 0; i < mod(k, K); ++i) r = r * a;
  return r;
}

bool operator==(const QuditPauli& a, const QuditPauli& b) {
  return a.p == b.p && a.x == b.x && a.z == b.z && mod(a.phase, phase_modulus(a.p)) == mod(b.phase, phase_modulus(b.p));
}

StabilizerTableau::StabilizerTableau(int p, std::size_t n_qudits) : p_(p), K_(phase_modulus(p)), n_(n_qudits) {
  check_prime(p);
  rows_.assign(n_ * 2 * n_, 0);
  phase_.assign(n_, 0);
  for (std::size_t q = 0; q < n_; ++q) rows_[q * 2 * n_ + n_ + q] = 1;
}

StabilizerTableau StabilizerTableau::from_generators(int p, std::size_t n_qudits,
                                                     const std::vector<QuditPauli>& gens) {
  StabilizerTableau t(p, n_qudits);
  t.rows_.clear();
  t.phase_.clear();
  for (const auto& g : gens) t.append_row(g);
  t.validate();
  return t;
}

QuditPauli StabilizerTableau::generator(std::size_t k) const {
  if (k >= n_generators()) throw DimensionError("generator index out of range");
  QuditPauli g = QuditPauli::identity(p_, n_);
  for (std::size_t q = 0; q < n_; ++q) {
    g.x[q] = x(k, q);
    g.z[q] = z(k, q);
  }
  g.phase = phase_[k];
  return g;
}

void StabilizerTableau::validate() const {
  const std::size_t r = n_generators();
  if (r > n_) throw Error("more generators than qudits");
  for (int v : rows_)
    if (v < 0 || v >= p_) throw Error("tableau entry outside [0, p)");
  std::vector<QuditPauli> g;
  for (std::size_t k = 0; k < r; ++k) g.push_back(generator(k));
  for (std::size_t a = 0; a < r; ++a) {
    if (p_ == 2) {
      int xz = 0;
      for (std::size_t q = 0; q < n_; ++q) xz += g[a].x[q] * g[a].z[q];
      if ((g[a].phase - xz) % 2 != 0) throw Error("generator is not Hermitian");
    }
    for (std::size_t b = a + 1; b < r; ++b)
      if (symplectic_form(g[a], g[b]) != 0) throw Error("generators do not commute");
  }
  // independence also rules out a phase times identity in the group
  if (rank_mod(rows_, r, 2 * n_, p_) != r) throw Error("generators are not independent");
}

void StabilizerTableau::multiply_row(std::size_t k, std::size_t j, int e) {
  e = mod(e, p_);
  if (e == 0) return;
  const std::size_t w = 2 * n_;
  int* gk = &rows_[k * w];
  const int* gj = &rows_[j * w];
  long long xz = 0, zx = 0;
  for (std::size_t q = 0; q < n_; ++q) xz += gj[q] * gj[n_ + q];
  // g_j^e = omega^{e c + (K/p) (z.x) e(e-1)/2} X^{e x} Z^{e z}
  const long long tri = static_cast<long long>(e) * (e - 1) / 2;
  long long ph = static_cast<long long>(e) * phase_[j] + static_cast<long long>(K_ / p_) * mod(mod(xz, p_) * tri, p_);
  for (std::size_t q = 0; q < n_; ++q) zx += static_cast<long long>(gk[n_ + q]) * (e * gj[q] % p_);
  ph += static_cast<long long>(K_ / p_) * mod(zx, p_);
  phase_[k] = mod(phase_[k] + ph, K_);
  for (std::size_t c = 0; c < w; ++c) gk[c] = (gk[c] + e * gj[c]) % p_;
}

void StabilizerTableau::set_row(std::size_t k, const QuditPauli& g) {
  if (g.p != p_ || g.size() != n_) throw DimensionError("Pauli does not match the tableau");
  for (std::size_t q = 0; q < n_; ++q) {
    rows_[k * 2 * n_ + q] = mod(g.x[q], p_);
    rows_[k * 2 * n_ + n_ + q] = mod(g.z[q], p_);
  }
  phase_[k] = mod(g.phase, K_);
}

void StabilizerTableau::append_row(const QuditPauli& g) {
  rows_.resize(rows_.size() + 2 * n_);
  phase_.push_back(0);
  set_row(phase_.size() - 1, g);
}

void StabilizerTableau::erase_row(std::size_t k) {
  const std::size_t w = 2 * n_;
  rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(k * w), rows_.begin() + static_cast<std::ptrdiff_t>((k + 1) * w));
  phase_.erase(phase_.begin() + static_cast<std::ptrdiff_t>(k));
}

void StabilizerTableau::swap_rows(std::size_t a, std::size_t b) {
  if (a == b) return;
  const std::size_t w = 2 * n_;
  std::swap_ranges(rows_.begin() + static_cast<std::ptrdiff_t>(a * w), rows_.begin() + static_cast<std::ptrdiff_t>((a + 1) * w),
                   rows_.begin() + static_cast<std::ptrdiff_t>(b * w));
  std::swap(phase_[a], phase_[b]);
}

void StabilizerTableau::erase_qudits(std::vector<std::size_t> qudits) {
  qudits = distinct_sorted(std::move(qudits));
  for (std::size_t q : qudits)
    if (q >= n_) throw DimensionError("qudit index out of range");
  std::vector<char> drop(n_, 0);
  for (std::size_t q : qudits) drop[q] = 1;
  const std::size_t m = n_ - qudits.size();
  std::vector<int> out(n_generators() * 2 * m);
  for (std::size_t k = 0; k < n_generators(); ++k) {
    std::size_t c = 0;
    for (std::size_t q = 0; q < n_; ++q) {
      if (drop[q]) continue;
      out[k * 2 * m + c] = x(k, q);
      out[k * 2 * m + m + c] = z(k, q);
      ++c;
    }
  }
  rows_ = std::move(out);
  n_ = m;
}

bool StabilizerTableau::reduce() {
  const std::size_t w = 2 * n_;
  std::size_t r = 0;
  const std::size_t rows = n_generators();
  for (std::size_t c = 0; c < w && r < rows; ++c) {
    std::size_t s = r;
    while (s < rows && rows_[s * w + c] == 0) ++s;
    if (s == rows) continue;
    swap_rows(s, r);
    const int inv = inverse_mod(rows_[r * w + c], p_);
    for (std::size_t i = r + 1; i < rows; ++i) {
      const int f = rows_[i * w + c];
      if (f != 0) multiply_row(i, r, mod(-static_cast<long long>(f) * inv, p_));
    }
    ++r;
  }
  bool ok = true;
  for (std::size_t i = r; i < rows; ++i)
    if (phase_[i] != 0) ok = false;
  rows_.resize(r * w);
  phase_.resize(r);
  return ok;
}

StabilizerTableau tensor_product(const StabilizerTableau& a, const StabilizerTableau& b) {
  if (a.p_ != b.p_) throw DimensionError("tensor product of tableaux with different p");
  StabilizerTableau t(a.p_, 0);
  const std::size_t n = a.n_ + b.n_, w = 2 * n;
  t.n_ = n;
  t.rows_.assign((a.n_generators() + b.n_generators()) * w, 0);
  t.phase_ = a.phase_;
  t.phase_.insert(t.phase_.end(), b.phase_.begin(), b.phase_.end());
  for (std::size_t k = 0; k < a.n_generators(); ++k)
    for (std::size_t q = 0; q < a.n_; ++q) {
      t.rows_[k * w + q] = a.x(k, q);
      t.rows_[k * w + n + q] = a.z(k, q);
    }
  for (std::size_t k = 0; k < b.n_generators(); ++k) {
    const std::size_t row = a.n_generators() + k;
    for (std::size_t q = 0; q < b.n_; ++q) {
      t.rows_[row * w + a.n_ + q] = b.x(k, q);
      t.rows_[row * w + n + a.n_ + q] = b.z(k, q);
    }
  }
  return t;
}

StabilizerTableau random_stabilizer_state(std::size_t n, int p, std::uint64_t seed) {
  check_prime(p);
  if (n < 1) throw DomainError("random_stabilizer_state needs at least one qudit");
  Rng rng(seed);
  const std::size_t w = 2 * n;
  std::vector<int> basis;  // accepted isotropic vectors, row-major
  for (std::size_t k = 0; k < n; ++k) {
    // constraints form(u, s) = x_u . z_s - z_u . x_s = 0 for every accepted s
    std::vector<int> c(k * w);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t q = 0; q < n; ++q) {
        c[i * w + q] = basis[i * w + n + q];
        c[i * w + n + q] = mod(-basis[i * w + q], p);
      }
    const auto piv = rref(c, k, w, p);
    std::vector<std::size_t> free_cols;
    for (std::size_t col = 0, j = 0; col < w; ++col) {
      if (j < piv.size() && piv[j] == col) {
        ++j;
        continue;
      }
      free_cols.push_back(col);
    }
    std::vector<int> u(w);
    for (;;) {
      // uniform element of the complement: free coordinates uniform, pivots solved
      std::fill(u.begin(), u.end(), 0);
      for (std::size_t f : free_cols) u[f] = static_cast<int>(rng.below(static_cast<std::uint64_t>(p)));
      for (std::size_t i = 0; i < piv.size(); ++i) {
        long long s = 0;
        for (std::size_t f : free_cols) s += static_cast<long long>(c[i * w + f]) * u[f];
        u[piv[i]] = mod(-s, p);
      }
      std::vector<int> m = basis;
      m.insert(m.end(), u.begin(), u.end());
      if (rank_mod(std::move(m), k + 1, w, p) == k + 1) break;
    }
    basis.insert(basis.end(), u.begin(), u.end());
  }
  std::vector<QuditPauli> gens;
  for (std::size_t k = 0; k < n; ++k) {
    QuditPauli g = QuditPauli::identity(p, n);
    int xz = 0;
    for (std::size_t q = 0; q < n; ++q) {
      g.x[q] = basis[k * w + q];
      g.z[q] = basis[k * w + n + q];
      xz += g.x[q] * g.z[q];
    }
    if (p == 2)
      g.phase = (xz % 2) + 2 * static_cast<int>(rng.below(2));
    else
      g.phase = static_cast<int>(rng.below(static_cast<std::uint64_t>(p)));
    gens.push_back(std::move(g));
  }
  StabilizerTableau t(p, n);
  for (std::size_t k = 0; k < n; ++k) t.set_row(k, gens[k]);
  return t;
}

StabilizerTableau conjugate(const StabilizerTableau& t) {
  StabilizerTableau out = t;
  for (std::size_t k = 0; k < t.n_generators(); ++k) {
    QuditPauli g = t.generator(k);
    for (auto& v : g.z) v = mod(-v, t.p());
    g.phase = -g.phase;
    out.set_row(k, g);
  }
  return out;
}

std::optional<StabilizerTableau> forced_measure(const StabilizerTableau& t, const QuditPauli& m) {
  if (m.p != t.p() || m.size() != t.n_qudits()) throw DimensionError("measured Pauli does not match the tableau");
  StabilizerTableau out = t;
  const std::size_t r = t.n_generators();
  std::vector<int> a(r);
  std::size_t j = r;
  for (std::size_t k = 0; k < r; ++k) {
    a[k] = symplectic_form(t.generator(k), m);
    if (a[k] != 0 && j == r) j = k;
  }
  if (j < r) {
    const int inv = inverse_mod(a[j], t.p());
    for (std::size_t k = 0; k < r; ++k)
      if (k != j && a[k] != 0) out.multiply_row(k, j, mod(-static_cast<long long>(a[k]) * inv, t.p()));
    out.set_row(j, m);
    return out;
  }
  out.append_row(m);
  if (!out.reduce()) return std::nullopt;
  return out;
}

std::optional<StabilizerTableau> forced_bell_project(const StabilizerTableau& t, std::size_t i, std::size_t j) {
  check_qudit(t, i);
  check_qudit(t, j);
  if (i == j) throw DimensionError("forced_bell_project needs two distinct qudits");
  const int p = t.p();
  const std::size_t n = t.n_qudits();
  QuditPauli xx = QuditPauli::x_on(p, n, i) * QuditPauli::x_on(p, n, j);
  QuditPauli zz = QuditPauli::z_on(p, n, i) * QuditPauli::z_on(p, n, j, -1);
  auto s = forced_measure(t, xx);
  if (!s) return std::nullopt;
  return forced_measure(*s, zz);
}

std::optional<StabilizerTableau> contract_pairs(const StabilizerTableau& t,
                                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<std::size_t> all;
  for (const auto& [i, j] : pairs) {
    check_qudit(t, i);
    check_qudit(t, j);
    all.push_back(i);
    all.push_back(j);
  }
  distinct_sorted(all);
  const bool pure = t.is_pure();
  StabilizerTableau out = t;
  const std::size_t n = t.n_qudits();
  const int p = t.p();
  // The Bell state fixes x_i = x_j and z_i = -z_j; on that subgroup the pair
  // factor has unit expectation, so the rest keeps its phase.
  for (const auto& [i, j] : pairs) {
    restrict_to_kernel(out, {{i, 1}, {j, p - 1}});
    restrict_to_kernel(out, {{n + i, 1}, {n + j, 1}});
  }
  return finish_removal(std::move(out), all, pure);
}

std::optional<StabilizerTableau> contract_bond(const StabilizerTableau& a, const StabilizerTableau& b,
                                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<std::pair<std::size_t, std::size_t>> shifted;
  for (const auto& [i, j] : pairs) {
    check_qudit(a, i);
    check_qudit(b, j);
    shifted.emplace_back(i, a.n_qudits() + j);
  }
  return contract_pairs(tensor_product(a, b), shifted);
}

std::optional<StabilizerTableau> project_zero(const StabilizerTableau& t, const std::vector<std::size_t>& qudits) {
  for (std::size_t q : qudits) check_qudit(t, q);
  const bool pure = t.is_pure();
  StabilizerTableau out = t;
  for (std::size_t q : qudits) restrict_to_kernel(out, {{q, 1}});
  return finish_removal(std::move(out), qudits, pure);
}

StabilizerTableau trace_out(const StabilizerTableau& t, const std::vector<std::size_t>& qudits) {
  for (std::size_t q : qudits) check_qudit(t, q);
  StabilizerTableau out = t;
  const std::size_t n = t.n_qudits();
  for (std::size_t q : qudits) {
    restrict_to_kernel(out, {{q, 1}});
    restrict_to_kernel(out, {{n + q, 1}});
  }
  auto r = finish_removal(std::move(out), qudits, false);
  if (!r) throw Error("inconsistent tableau");
  return *r;
}

std::size_t region_rank(const StabilizerTableau& t, const std::vector<std::size_t>& region) {
  const auto reg = distinct_sorted(region);
  for (std::size_t q : reg) check_qudit(t, q);
  const std::size_t r = t.n_generators(), a = reg.size(), n = t.n_qudits();
  std::vector<int> m(r * 2 * a);
  const auto& rows = t.raw_rows();
  for (std::size_t k = 0; k < r; ++k)
    for (std::size_t i = 0; i < a; ++i) {
      m[k * 2 * a + i] = rows[k * 2 * n + reg[i]];
      m[k * 2 * a + a + i] = rows[k * 2 * n + n + reg[i]];
    }
  return rank_mod(std::move(m), r, 2 * a, t.p());
}

double entanglement_entropy(const StabilizerTableau& t, const std::vector<std::size_t>& region) {
  if (!t.is_pure()) throw DomainError("entanglement_entropy needs a pure tableau");
  const std::size_t rk = region_rank(t, region);
  return static_cast<double>(rk) - static_cast<double>(region.size());
}

double operator_entanglement(const StabilizerTableau& t, const std::vector<std::size_t>& region) {
  const auto reg = distinct_sorted(region);
  std::vector<std::size_t> rest;
  for (std::size_t q = 0, i = 0; q < t.n_qudits(); ++q) {
    if (i < reg.size() && reg[i] == q) {
      ++i;
      continue;
    }
    rest.push_back(q);
  }
  const std::size_t all = rank_mod(t.raw_rows(), t.n_generators(), 2 * t.n_qudits(), t.p());
  return static_cast<double>(region_rank(t, reg)) + static_cast<double>(region_rank(t, rest)) -
         static_cast<double>(all);
}

}  // namespace pepslab
