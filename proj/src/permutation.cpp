#include <algorithm>
#include <sstream>

#include "pepslab/errors.hpp"
#include "pepslab/replica.hpp"

namespace pepslab {

Permutation Permutation::identity(std::size_t size) {
  Permutation p;
  p.images.resize(size);
  for (std::size_t i = 0; i < size; ++i) p.images[i] = static_cast<int>(i);
  return p;
}

Permutation Permutation::from_cycles(std::size_t size, const std::vector<std::vector<int>>& cycles) {
  Permutation p = identity(size);
  std::vector<char> seen(size, 0);
  for (const auto& c : cycles) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      const int a = c[i];
      if (a < 0 || static_cast<std::size_t>(a) >= size) throw DimensionError("from_cycles: element out of range");
      if (seen[static_cast<std::size_t>(a)]) throw DomainError("from_cycles: cycles are not disjoint");
      seen[static_cast<std::size_t>(a)] = 1;
      p.images[static_cast<std::size_t>(a)] = c[(i + 1) % c.size()];
    }
  }
  return p;
}

Permutation Permutation::inverse() const {
  Permutation p;
  p.images.resize(size());
  for (std::size_t i = 0; i < size(); ++i) p.images[static_cast<std::size_t>(images[i])] = static_cast<int>(i);
  return p;
}

int Permutation::cycles() const {
  std::vector<char> seen(size(), 0);
  int c = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (seen[i]) continue;
    ++c;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(images[j])) seen[j] = 1;
  }
  return c;
}

std::string Permutation::str() const {
  std::ostringstream os;
  std::vector<char> seen(size(), 0);
  auto label = [](std::size_t s) { return std::to_string(s / 2 + 1) + (s % 2 ? "'" : ""); };
  for (std::size_t i = 0; i < size(); ++i) {
    if (seen[i]) continue;
    os << '(';
    bool first = true;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(images[j])) {
      seen[j] = 1;
      if (!first) os << ' ';
      os << label(j);
      first = false;
    }
    os << ')';
  }
  return os.str();
}

void Permutation::validate() const {
  std::vector<char> seen(size(), 0);
  for (int v : images) {
    if (v < 0 || static_cast<std::size_t>(v) >= size() || seen[static_cast<std::size_t>(v)])
      throw DomainError("permutation images are not a bijection");
    seen[static_cast<std::size_t>(v)] = 1;
  }
}

Permutation operator*(const Permutation& g, const Permutation& h) {
  if (g.size() != h.size()) throw DimensionError("permutation sizes differ");
  Permutation r;
  r.images.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) r.images[i] = g(h(static_cast<int>(i)));
  return r;
}

bool operator==(const Permutation& a, const Permutation& b) { return a.images == b.images; }

int replica_slot(int k, bool bar) { return 2 * (k - 1) + (bar ? 1 : 0); }

int cycle_count(const Permutation& g, const Permutation& h) {
  if (g.size() != h.size()) throw DimensionError("cycle_count: permutation sizes differ");
  // cycles of g^{-1} h without forming the product
  const Permutation gi = g.inverse();
  std::vector<char> seen(g.size(), 0);
  int c = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (seen[i]) continue;
    ++c;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(gi(h(static_cast<int>(j))))) seen[j] = 1;
  }
  return c;
}

BoundaryPerms boundary_perms(int n, int m) {
  if (n < 1 || m < 1) throw DomainError("boundary_perms: n and m must be positive");
  const int Q = n * m;
  const auto size = static_cast<std::size_t>(2 * Q);
  BoundaryPerms b{Permutation::identity(size), Permutation::identity(size), Permutation::identity(size)};
  for (int k = 1; k <= Q; ++k) {
    const int a = replica_slot(k, false), ab = replica_slot(k, true);
    b.g0.images[static_cast<std::size_t>(a)] = ab;
    b.g0.images[static_cast<std::size_t>(ab)] = a;
  }
  for (int block = 0; block < m; ++block)
    for (int j = 1; j <= n; ++j) {
      const int k = block * n + j;
      const int next = block * n + (j % n) + 1;
      const int a = replica_slot(k, false), bb = replica_slot(next, true);
      b.gA.images[static_cast<std::size_t>(a)] = bb;
      b.gA.images[static_cast<std::size_t>(bb)] = a;
    }
  return b;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

std::uint64_t permutation_rank(const Permutation& g) {
  const std::size_t n = g.size();
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (g.images[j] < g.images[i]) ++smaller;
    r = r * (n - i) + smaller;
  }
  return r;
}

Permutation permutation_unrank(std::size_t size, std::uint64_t rank) {
  std::vector<std::uint64_t> digit(size);
  for (std::size_t i = size; i-- > 0;) {
    const std::uint64_t base = size - i;
    digit[i] = rank % base;
    rank /= base;
  }
  std::vector<int> pool(size);
  for (std::size_t i = 0; i < size; ++i) pool[i] = static_cast<int>(i);
  Permutation p;
  p.images.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    p.images[i] = pool[digit[i]];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(digit[i]));
  }
  return p;
}

}  // namespace pepslab
