#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace pepslab {

bool is_prime(long p);

// Phases are exponents of omega = exp(2 pi i / p) for odd p and of i for p = 2,
// so the exponent lives modulo p or modulo 4 respectively.
int phase_modulus(int p);

// omega^phase * prod_q X_q^{x_q} Z_q^{z_q}, with Z X = omega X Z.
struct QuditPauli {
  int p = 2;
  std::vector<int> x, z;
  int phase = 0;

  std::size_t size() const { return x.size(); }
  bool is_identity() const;
  static QuditPauli identity(int p, std::size_t n);
  // Single-qudit X^a or Z^b factors embedded in n qudits.
  static QuditPauli x_on(int p, std::size_t n, std::size_t q, int power = 1);
  static QuditPauli z_on(int p, std::size_t n, std::size_t q, int power = 1);
};

// x_a . z_b - z_a . x_b mod p; a b = omega^{-form} b a.
int symplectic_form(const QuditPauli& a, const QuditPauli& b);
QuditPauli operator*(const QuditPauli& a, const QuditPauli& b);
QuditPauli power(const QuditPauli& a, long k);
bool operator==(const QuditPauli& a, const QuditPauli& b);

// K commuting, independent generators on N qudits; K = N for a pure state.
// Rows store the x block followed by the z block.
class StabilizerTableau {
 public:
  StabilizerTableau() = default;
  // |0...0>, generated by Z_q.
  StabilizerTableau(int p, std::size_t n_qudits);
  static StabilizerTableau from_generators(int p, std::size_t n_qudits, const std::vector<QuditPauli>& gens);

  int p() const { return p_; }
  std::size_t n_qudits() const { return n_; }
  std::size_t n_generators() const { return phase_.size(); }
  bool is_pure() const { return n_generators() == n_; }

  QuditPauli generator(std::size_t k) const;
  int x(std::size_t k, std::size_t q) const { return rows_[k * 2 * n_ + q]; }
  int z(std::size_t k, std::size_t q) const { return rows_[k * 2 * n_ + n_ + q]; }
  int phase(std::size_t k) const { return phase_[k]; }

  // Throws Error unless the generators commute, are independent, are
  // consistent and (for p = 2) Hermitian.
  void validate() const;

  // g_k <- g_k * g_j^e.
  void multiply_row(std::size_t k, std::size_t j, int e);
  void set_row(std::size_t k, const QuditPauli& g);
  void append_row(const QuditPauli& g);
  void erase_row(std::size_t k);
  void swap_rows(std::size_t a, std::size_t b);
  // Removes qudit columns; the caller guarantees the remaining group is the intended reduced state.
  void erase_qudits(std::vector<std::size_t> qudits);
  // Row-reduces the generating set. Returns false if the group contains omega^c I with c != 0.
  bool reduce();

  const std::vector<int>& raw_rows() const { return rows_; }

 private:
  int p_ = 2;
  int K_ = 4;
  std::size_t n_ = 0;
  std::vector<int> rows_;
  std::vector<int> phase_;

  friend StabilizerTableau tensor_product(const StabilizerTableau& a, const StabilizerTableau& b);
};

StabilizerTableau random_stabilizer_state(std::size_t n, int p, std::uint64_t seed);
// Complex conjugate state: generators omega^c X^x Z^z -> omega^{-c} X^x Z^{-z}.
StabilizerTableau conjugate(const StabilizerTableau& t);
StabilizerTableau tensor_product(const StabilizerTableau& a, const StabilizerTableau& b);

// Projection onto the +1 eigenspace of m (phase included). nullopt: the projection vanishes.
std::optional<StabilizerTableau> forced_measure(const StabilizerTableau& t, const QuditPauli& m);
// Projects onto the +1 eigenspaces of X_i X_j and Z_i Z_j^{-1}.
std::optional<StabilizerTableau> forced_bell_project(const StabilizerTableau& t, std::size_t i, std::size_t j);

// Bell-contracts qudit pairs (i, j) of one state and removes them.
std::optional<StabilizerTableau> contract_pairs(const StabilizerTableau& t,
                                                const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
// Tensors a and b, then contracts (qudit of a, qudit of b) pairs. Remaining
// qudits keep their order, a's before b's.
std::optional<StabilizerTableau> contract_bond(const StabilizerTableau& a, const StabilizerTableau& b,
                                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
// Contracts each listed qudit with <0| and removes it.
std::optional<StabilizerTableau> project_zero(const StabilizerTableau& t, const std::vector<std::size_t>& qudits);
// Partial trace; the result is in general mixed.
StabilizerTableau trace_out(const StabilizerTableau& t, const std::vector<std::size_t>& qudits);

// Rank over F_p of the generator columns of `region` (both x and z columns).
std::size_t region_rank(const StabilizerTableau& t, const std::vector<std::size_t>& region);
// Pure state: rank(A) - |A|, in units of log p.
double entanglement_entropy(const StabilizerTableau& t, const std::vector<std::size_t>& region);
// Entropy of the vectorized (ket-bra) state across region | complement, in
// units of log p: rank(A) + rank(B) - K. Equals twice the entropy for pure states.
double operator_entanglement(const StabilizerTableau& t, const std::vector<std::size_t>& region);

}  // namespace pepslab
