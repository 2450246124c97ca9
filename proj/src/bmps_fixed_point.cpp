#include <algorithm>
#include <cmath>

#include "bmps_internal.hpp"
#include "pepslab/errors.hpp"

namespace pepslab {

namespace {

double spectrum_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < std::max(a.size(), b.size()); ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    d = std::max(d, std::abs(x - y));
  }
  return d;
}

}  // namespace

FixedPointResult fixed_point(const DoubleTensor& dt, std::size_t chi, const FixedPointOptions& opt) {
  if (chi < 1) throw DomainError("fixed_point: chi must be at least 1");
  const std::size_t dd = dt.D * dt.D;
  BoundaryMps b;
  if (opt.initial) {
    b = *opt.initial;
  } else {
    b = init_boundary(dt);
    if (b.chi() > chi) {
      b = truncate(b, chi, opt.engine).bmps;
    } else {
      while (dd > 1 && b.chi() * dd <= chi) {
        b = apply_row(b, dt);
        b.B *= Complex(1.0 / b.B.norm());
      }
    }
  }

  detail::EnvCache cache;
  std::vector<double> prev = b.schmidt;
  FixedPointResult res;
  double last_ds = 1.0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    // environments only need to be as accurate as the current iterate
    EngineOptions eng = opt.engine;
    eng.eig_tol = std::max(opt.engine.eig_tol, std::min(1e-6, 1e-3 * last_ds));
    detail::RowSource src(b.B, dt);
    TruncationResult tr = detail::truncate_source(src, chi, eng, &cache);
    const Complex f = fidelity_per_site(b, tr.bmps, opt.engine);
    const double df = std::abs(1.0 - std::abs(f));
    const double ds = spectrum_distance(prev, tr.schmidt);
    last_ds = ds;
    res.fidelity_history.push_back(df);
    b = std::move(tr.bmps);
    prev = std::move(tr.schmidt);
    if (df < opt.fidelity_tol && ds < opt.spectrum_tol) {
      res.bmps = std::move(b);
      res.iterations = it;
      res.schmidt = prev;
      return res;
    }
  }
  double best = res.fidelity_history.empty()
                    ? 1.0
                    : *std::min_element(res.fidelity_history.begin(), res.fidelity_history.end());
  throw ConvergenceError("boundary fixed point did not converge", best, res.fidelity_history);
}

}  // namespace pepslab
