#include <cmath>
#include <limits>

#include "bmps_internal.hpp"
#include "pepslab/errors.hpp"

namespace pepslab {

namespace {

// Fixes one leg to index 0 but keeps it as an extent-1 axis.
DenseTensor pin_leg(const DenseTensor& t, std::size_t axis) {
  Shape s = t.shape();
  s[axis] = 1;
  return t.slice(axis, 0).reshaped(s);
}

DenseTensor site_tensor(const PepsLattice& lat, std::size_t x, std::size_t y, bool reflect, bool pin_up,
                        bool pin_down) {
  DenseTensor t = lat.at(x, reflect ? lat.Ly - 1 - y : y).tensor;
  if (reflect) t = t.permuted({0, 1, 4, 3, 2});
  if (x == 0) t = pin_leg(t, 1);
  if (x + 1 == lat.Lx) t = pin_leg(t, 3);
  if (pin_up) t = pin_leg(t, 2);
  if (pin_down) t = pin_leg(t, 4);
  return t;
}

void check_network(const FiniteNetwork& net) {
  if (!net.ket) throw DomainError("finite network needs a ket lattice");
  const PepsLattice& b = net.bra_lattice();
  if (net.ket->boundary != Boundary::Open || b.boundary != Boundary::Open)
    throw DomainError("finite boundary MPS supports open boundaries only");
  if (b.Lx != net.ket->Lx || b.Ly != net.ket->Ly || b.D() != net.ket->D() || b.d() != net.ket->d())
    throw DimensionError("ket and bra lattices differ");
}

std::vector<DenseTensor> open_row(const FiniteNetwork& net, std::size_t y, bool pin_up, bool pin_down,
                                  std::size_t open_x) {
  std::vector<DenseTensor> row;
  for (std::size_t x = 0; x < net.ket->Lx; ++x) {
    DenseTensor k = site_tensor(*net.ket, x, y, false, pin_up, pin_down);
    DenseTensor b = site_tensor(net.bra_lattice(), x, y, false, pin_up, pin_down);
    row.push_back(x == open_x ? build_double_open(k, b) : build_double(k, b));
  }
  return row;
}

FiniteBoundaryMps trivial_boundary(std::size_t lx) {
  FiniteBoundaryMps b;
  b.sites.assign(lx, DenseTensor({1, 1, 1}, {Complex(1.0)}));
  b.cut_schmidt = {1.0};
  return b;
}

}  // namespace

std::vector<DenseTensor> finite_row(const FiniteNetwork& net, std::size_t y, bool slice_up, bool slice_down,
                                    bool reflect) {
  check_network(net);
  std::vector<DenseTensor> row;
  for (std::size_t x = 0; x < net.ket->Lx; ++x)
    row.push_back(build_double(site_tensor(*net.ket, x, y, reflect, slice_up, slice_down),
                               site_tensor(net.bra_lattice(), x, y, reflect, slice_up, slice_down)));
  return row;
}

FiniteBoundaryMps finite_first_row(const std::vector<DenseTensor>& row) {
  FiniteBoundaryMps b;
  for (const auto& e : row) {
    if (e.extent(1) != 1) throw DimensionError("first row must have its up legs fixed");
    b.sites.push_back(e.slice(1, 0).permuted({2, 0, 1}));
  }
  return b;
}

FiniteBoundaryMps finite_apply_row(const FiniteBoundaryMps& b, const std::vector<DenseTensor>& row) {
  if (row.size() != b.sites.size()) throw DimensionError("row length mismatch");
  FiniteBoundaryMps out;
  out.log_scale = b.log_scale;
  out.phase = b.phase;
  for (std::size_t x = 0; x < row.size(); ++x) {
    const DenseTensor& s = b.sites[x];
    const DenseTensor& e = row[x];
    if (s.extent(0) != e.extent(1)) throw DimensionError("boundary physical extent does not match the row");
    DenseTensor t = contract(s, {0}, e, {1}).permuted({4, 0, 2, 1, 3});
    out.sites.push_back(t.reshaped({e.extent(3), s.extent(1) * e.extent(0), s.extent(2) * e.extent(2)}));
  }
  return out;
}

FiniteBoundaryMps finite_truncate(const FiniteBoundaryMps& b, const FiniteOptions& opt) {
  if (opt.chi < 1) throw DomainError("chi must be at least 1");
  const std::size_t L = b.sites.size();
  const std::size_t cut = opt.cut.value_or(L / 2);
  FiniteBoundaryMps out;
  out.log_scale = b.log_scale;
  out.phase = b.phase;
  out.cut_schmidt = {1.0};
  std::vector<DenseTensor> a;
  for (const auto& s : b.sites) a.push_back(s.permuted({1, 0, 2}));  // [l, p, r]

  for (std::size_t x = 0; x + 1 < L; ++x) {
    const std::size_t l = a[x].extent(0), p = a[x].extent(1), r = a[x].extent(2);
    Eigen::HouseholderQR<MatrixXc> qr(a[x].matrix(2));
    const auto k = std::min<Eigen::Index>(static_cast<Eigen::Index>(l * p), static_cast<Eigen::Index>(r));
    MatrixXc q = qr.householderQ() * MatrixXc::Identity(static_cast<Eigen::Index>(l * p), k);
    MatrixXc rm = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    a[x] = DenseTensor::from_matrix(q).reshaped({l, p, static_cast<std::size_t>(k)});
    a[x + 1] = contract(DenseTensor::from_matrix(rm), {1}, a[x + 1], {0});
  }
  double nrm = a[L - 1].norm();
  if (!(nrm > 0.0) || !std::isfinite(nrm)) throw Error("boundary state vanished during contraction");
  a[L - 1] *= Complex(1.0 / nrm);
  out.log_scale += std::log(nrm);

  for (std::size_t x = L - 1; x >= 1; --x) {
    const std::size_t l = a[x].extent(0), p = a[x].extent(1), r = a[x].extent(2);
    SvdResult svd = svd_truncate(a[x].matrix(1), opt.chi);
    std::size_t k = 0;
    while (k < svd.singular_values.size() && svd.singular_values[k] > 1e-14 * svd.singular_values[0]) ++k;
    if (k == 0) throw Error("boundary state vanished during truncation");
    Eigen::VectorXd s(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) s(static_cast<Eigen::Index>(i)) = svd.singular_values[i];
    const double sn = s.norm();
    s /= sn;
    out.log_scale += std::log(sn);
    if (x == cut) out.cut_schmidt.assign(s.data(), s.data() + s.size());
    const auto ki = static_cast<Eigen::Index>(k);
    a[x] = DenseTensor::from_matrix(svd.right_vectors_conj.topRows(ki)).reshaped({k, p, r});
    MatrixXc us = svd.left_vectors.leftCols(ki) * s.asDiagonal();
    a[x - 1] = contract(a[x - 1], {2}, DenseTensor::from_matrix(us), {0});
    (void)l;
  }
  const double n0 = a[0].norm();
  a[0] *= Complex(1.0 / n0);
  out.log_scale += std::log(n0);
  for (auto& t : a) out.sites.push_back(t.permuted({1, 0, 2}));
  return out;
}

std::vector<double> finite_entropy_profile(const FiniteNetwork& net, const FiniteOptions& opt) {
  check_network(net);
  std::vector<double> prof;
  FiniteBoundaryMps b;
  for (std::size_t y = 0; y < net.ket->Ly; ++y) {
    auto row = finite_row(net, y, y == 0, false);
    b = y == 0 ? finite_first_row(row) : finite_apply_row(b, row);
    b = finite_truncate(b, opt);
    prof.push_back(renyi_entropy(b.cut_schmidt, 1.0));
  }
  return prof;
}

std::vector<double> finite_entropy_profile(const PepsLattice& lattice, std::size_t chi, std::optional<std::size_t> cut) {
  FiniteNetwork net{&lattice, nullptr};
  FiniteOptions opt;
  opt.chi = chi;
  opt.cut = cut;
  return finite_entropy_profile(net, opt);
}

namespace {

// Boundary after rows [0, rows) coming from the top (or bottom if reflect).
FiniteBoundaryMps boundary_after(const FiniteNetwork& net, std::size_t rows, std::size_t chi, bool reflect) {
  if (rows == 0) return trivial_boundary(net.ket->Lx);
  FiniteOptions opt;
  opt.chi = chi;
  FiniteBoundaryMps b;
  for (std::size_t y = 0; y < rows; ++y) {
    auto row = finite_row(net, y, y == 0, false, reflect);
    b = y == 0 ? finite_first_row(row) : finite_apply_row(b, row);
    b = finite_truncate(b, opt);
  }
  return b;
}

}  // namespace

LogScalar finite_norm(const FiniteNetwork& net, std::size_t chi) {
  check_network(net);
  const std::size_t Ly = net.ket->Ly;
  FiniteOptions opt;
  opt.chi = chi;
  FiniteBoundaryMps b;
  for (std::size_t y = 0; y < Ly; ++y) {
    auto row = finite_row(net, y, y == 0, y + 1 == Ly);
    b = y == 0 ? finite_first_row(row) : finite_apply_row(b, row);
    b = finite_truncate(b, opt);
  }
  MatrixXc v = MatrixXc::Ones(1, 1);
  for (const auto& s : b.sites) v = v * s.slice(0, 0).to_matrix();
  const Complex z = v(0, 0);
  LogScalar out;
  out.log_abs = b.log_scale + std::log(std::abs(z));
  out.phase = b.phase * z / std::abs(z);
  return out;
}

MatrixXc finite_reduced_density_matrix(const FiniteNetwork& net, std::size_t chi, std::size_t x0, std::size_t y0) {
  check_network(net);
  const std::size_t Lx = net.ket->Lx, Ly = net.ket->Ly;
  if (x0 >= Lx || y0 >= Ly) throw DimensionError("site out of range");
  const FiniteBoundaryMps top = boundary_after(net, y0, chi, false);
  const FiniteBoundaryMps bot = boundary_after(net, Ly - 1 - y0, chi, true);
  const auto row = open_row(net, y0, y0 == 0, y0 + 1 == Ly, x0);
  const std::size_t d = net.ket->d();

  DenseTensor y({1, 1, 1, 1}, {Complex(1.0)});  // [P, a, l, b]
  for (std::size_t x = 0; x < Lx; ++x) {
    const DenseTensor& t = top.sites[x];
    const DenseTensor& bb = bot.sites[x];
    DenseTensor w = contract(y, {1}, t, {1});  // [P,l,b,u,a']
    if (x != x0) {
      w = contract(w, {1, 3}, row[x], {0, 1});  // [P,b,a',r,d]
      y = contract(w, {1, 4}, bb, {1, 0});       // [P,a',r,b']
    } else {
      w = contract(w, {1, 3}, row[x], {2, 3});  // [P,b,a',s,s',r,d]
      w = contract(w, {1, 6}, bb, {1, 0});       // [P,a',s,s',r,b']
      w = w.permuted({0, 2, 3, 1, 4, 5});
      y = w.reshaped({w.extent(0) * d * d, w.extent(3), w.extent(4), w.extent(5)});
    }
    // keep the running environment well scaled
    const double n = y.norm();
    if (n > 0.0) y *= Complex(1.0 / n);
  }
  MatrixXc rho = y.reshaped({d, d}).to_matrix();
  const Complex tr = rho.trace();
  if (!(std::abs(tr) > 1e-12 * rho.norm())) throw Error("finite_reduced_density_matrix: environment norm vanishes");
  return rho / tr;
}

}  // namespace pepslab
