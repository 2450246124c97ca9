#include <cmath>

#include "pepslab/errors.hpp"
#include "pepslab/replica.hpp"

namespace pepslab {

namespace {

// Delete-one jackknife of theta(leave-one-out values).
template <class F>
JackknifeResult jackknife(std::size_t N, double full, F leave_out) {
  if (N < 2) return {full, 0.0};
  long double mean = 0.0L;
  std::vector<double> t(N);
  for (std::size_t i = 0; i < N; ++i) {
    t[i] = leave_out(i);
    mean += t[i];
  }
  mean /= static_cast<long double>(N);
  long double ss = 0.0L;
  for (double v : t) ss += (v - mean) * (v - mean);
  const double n = static_cast<double>(N);
  return {full, std::sqrt(static_cast<double>(ss) * (n - 1.0) / n)};
}

}  // namespace

JackknifeResult jackknife_mean(const std::vector<double>& x) {
  if (x.empty()) throw DomainError("jackknife_mean: no samples");
  long double s = 0.0L;
  for (double v : x) s += v;
  const long double N = static_cast<long double>(x.size());
  return jackknife(x.size(), static_cast<double>(s / N),
                   [&](std::size_t i) { return static_cast<double>((s - x[i]) / (N - 1.0L)); });
}

JackknifeResult jackknife_ratio_log(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || x.size() != y.size()) throw DomainError("jackknife_ratio_log: sample counts differ");
  long double sx = 0.0L, sy = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  return jackknife(x.size(), static_cast<double>(std::log(sx / sy)),
                   [&](std::size_t i) { return static_cast<double>(std::log((sx - x[i]) / (sy - y[i]))); });
}

MeanStd mean_std(const std::vector<double>& x) {
  if (x.empty()) return {};
  long double s = 0.0L;
  for (double v : x) s += v;
  const long double mean = s / static_cast<long double>(x.size());
  long double ss = 0.0L;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = x.size() > 1 ? std::sqrt(static_cast<double>(ss / static_cast<long double>(x.size() - 1))) : 0.0;
  return {static_cast<double>(mean), sd};
}

}  // namespace pepslab
