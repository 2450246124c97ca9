#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pepslab/stabilizer.hpp"

namespace pepslab {

enum class Ensemble { Clean, Disordered };

std::string to_string(Ensemble e);
Ensemble ensemble_from_string(const std::string& s);

// Random stabilizer PEPS with D = p^k_D and d = p^k_d, periodic in x and open in y.
struct StabilizerPepsSpec {
  int p = 2;
  int k_D = 1;
  int k_d = 1;
  std::size_t Lx = 8;
  std::size_t Ly = 8;
  Ensemble ensemble = Ensemble::Disordered;
  std::uint64_t seed = 0;

  void validate() const;
};

// Site tensor as a pure state on [phys (k_d), l, u, r, d (k_D each)].
StabilizerTableau stabilizer_site(const StabilizerPepsSpec& spec, std::size_t x, std::size_t y);
// Site tensor times its conjugate with the physical qudits contracted:
// [ket l, u, r, d | bra l, u, r, d].
StabilizerTableau doubled_site(const StabilizerTableau& site, int k_d);

struct LayerProfile {
  // Entropy of the boundary state after rows 0..y, per cut of the ring, in units of log p.
  std::vector<double> S;
  bool zero = false;  // the contraction vanished at row zero_row
  std::size_t zero_row = 0;
};

// A = the first `cut` columns (default Lx / 2). The ring has two cut points,
// so the doubled-state entropy of A is halved.
LayerProfile layer_profile(const StabilizerPepsSpec& spec, std::optional<std::size_t> cut = std::nullopt);

struct SampledProfile {
  std::vector<double> S;
  std::uint64_t seed_used = 0;
  int resamples = 0;
};

// Redraws with derive_seed(seed, attempt) while the contraction vanishes.
SampledProfile sample_layer_profile(const StabilizerPepsSpec& spec, std::optional<std::size_t> cut = std::nullopt,
                                    int max_resamples = 1000);

}  // namespace pepslab
