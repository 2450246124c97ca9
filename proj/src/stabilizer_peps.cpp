#include "pepslab/stabilizer_peps.hpp"

#include <algorithm>

#include "pepslab/errors.hpp"
#include "pepslab/rng.hpp"

namespace pepslab {

namespace {

enum Leg { kL = 0, kU = 1, kR = 2, kD = 3, kIn = 4 };  // kIn: down leg of the previous row

// Qudit label: site column, leg, ket/bra, index within the leg.
struct Label {
  std::size_t x;
  int leg;
  int bra;
  int k;
  bool operator==(const Label& o) const { return x == o.x && leg == o.leg && bra == o.bra && k == o.k; }
};

struct Boundary {
  StabilizerTableau t;
  std::vector<Label> labels;

  std::size_t find(const Label& l) const {
    auto it = std::find(labels.begin(), labels.end(), l);
    if (it == labels.end()) throw Error("layer_profile: missing qudit label");
    return static_cast<std::size_t>(it - labels.begin());
  }
};

// Contracts the labelled pairs and drops them from the label list. false: the state vanished.
bool contract_labels(Boundary& b, const std::vector<std::pair<Label, Label>>& pairs) {
  if (pairs.empty()) return true;
  std::vector<std::pair<std::size_t, std::size_t>> idx;
  std::vector<char> gone(b.labels.size(), 0);
  for (const auto& [a, c] : pairs) {
    const std::size_t i = b.find(a), j = b.find(c);
    idx.emplace_back(i, j);
    gone[i] = gone[j] = 1;
  }
  auto r = contract_pairs(b.t, idx);
  if (!r) return false;
  b.t = std::move(*r);
  std::vector<Label> kept;
  for (std::size_t q = 0; q < b.labels.size(); ++q)
    if (!gone[q]) kept.push_back(b.labels[q]);
  b.labels = std::move(kept);
  return true;
}

}  // namespace

std::string to_string(Ensemble e) { return e == Ensemble::Clean ? "clean" : "disordered"; }

Ensemble ensemble_from_string(const std::string& s) {
  if (s == "clean") return Ensemble::Clean;
  if (s == "disordered") return Ensemble::Disordered;
  throw DomainError("unknown ensemble '" + s + "'");
}

void StabilizerPepsSpec::validate() const {
  if (!is_prime(p)) throw DomainError("p must be prime");
  if (k_D < 0 || k_d < 0) throw DomainError("k_D and k_d must be non-negative");
  if (Lx < 1 || Ly < 1) throw DomainError("lattice must be at least 1x1");
}

StabilizerTableau stabilizer_site(const StabilizerPepsSpec& spec, std::size_t x, std::size_t y) {
  const auto n = static_cast<std::size_t>(spec.k_d + 4 * spec.k_D);
  if (n == 0) return StabilizerTableau(spec.p, 0);
  const std::uint64_t s =
      spec.ensemble == Ensemble::Clean ? spec.seed : derive_seed(spec.seed, y * spec.Lx + x);
  return random_stabilizer_state(n, spec.p, s);
}

StabilizerTableau doubled_site(const StabilizerTableau& site, int k_d) {
  std::vector<std::pair<std::size_t, std::size_t>> phys;
  for (int s = 0; s < k_d; ++s) phys.emplace_back(static_cast<std::size_t>(s), static_cast<std::size_t>(s));
  auto r = contract_bond(site, conjugate(site), phys);
  if (!r) throw Error("doubled site tensor vanished");
  return *r;
}

LayerProfile layer_profile(const StabilizerPepsSpec& spec, std::optional<std::size_t> cut) {
  spec.validate();
  const std::size_t Lx = spec.Lx;
  const std::size_t a_cols = cut.value_or(Lx / 2);
  if (a_cols > Lx) throw DimensionError("cut exceeds the lattice width");
  const int legs = spec.k_D;

  LayerProfile out;
  Boundary b{StabilizerTableau(spec.p, 0), {}};
  StabilizerTableau clean_site;
  if (spec.ensemble == Ensemble::Clean) clean_site = doubled_site(stabilizer_site(spec, 0, 0), spec.k_d);

  for (std::size_t y = 0; y < spec.Ly; ++y) {
    for (std::size_t x = 0; x < Lx; ++x) {
      StabilizerTableau s = spec.ensemble == Ensemble::Clean ? clean_site
                                                             : doubled_site(stabilizer_site(spec, x, y), spec.k_d);
      std::vector<Label> sl;
      for (int bra = 0; bra < 2; ++bra)
        for (int leg = 0; leg < 4; ++leg)
          for (int k = 0; k < legs; ++k) sl.push_back({x, leg, bra, k});
      if (y == 0) {
        // top legs fixed to index 0
        std::vector<std::size_t> up;
        std::vector<Label> kept;
        for (std::size_t q = 0; q < sl.size(); ++q) {
          if (sl[q].leg == kU)
            up.push_back(q);
          else
            kept.push_back(sl[q]);
        }
        auto r = project_zero(s, up);
        if (!r) {
          out.zero = true;
          out.zero_row = y;
          return out;
        }
        s = std::move(*r);
        sl = std::move(kept);
      }
      b.t = tensor_product(b.t, s);
      b.labels.insert(b.labels.end(), sl.begin(), sl.end());

      std::vector<std::pair<Label, Label>> pairs;
      for (int bra = 0; bra < 2; ++bra)
        for (int k = 0; k < legs; ++k) {
          if (y > 0) pairs.push_back({Label{x, kIn, bra, k}, Label{x, kU, bra, k}});
          if (x > 0) pairs.push_back({Label{x - 1, kR, bra, k}, Label{x, kL, bra, k}});
          if (x + 1 == Lx) pairs.push_back({Label{x, kR, bra, k}, Label{0, kL, bra, k}});
        }
      if (!contract_labels(b, pairs)) {
        out.zero = true;
        out.zero_row = y;
        return out;
      }
    }
    // only this row's down legs remain; relabel them as the incoming boundary
    for (auto& l : b.labels) l.leg = kIn;
    std::vector<std::size_t> region;
    for (std::size_t q = 0; q < b.labels.size(); ++q)
      if (b.labels[q].x < a_cols) region.push_back(q);
    out.S.push_back(entanglement_entropy(b.t, region) / 2.0);
  }
  return out;
}

SampledProfile sample_layer_profile(const StabilizerPepsSpec& spec, std::optional<std::size_t> cut,
                                    int max_resamples) {
  StabilizerPepsSpec s = spec;
  for (int attempt = 0; attempt <= max_resamples; ++attempt) {
    s.seed = attempt == 0 ? spec.seed : derive_seed(spec.seed, static_cast<std::uint64_t>(attempt));
    LayerProfile lp = layer_profile(s, cut);
    if (!lp.zero) return {std::move(lp.S), s.seed, attempt};
  }
  throw Error("stabilizer PEPS contraction vanished for every resampled seed");
}

}  // namespace pepslab
