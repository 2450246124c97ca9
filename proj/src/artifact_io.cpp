#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "experiment_detail.hpp"
#include "pepslab/errors.hpp"

namespace pepslab::detail {

namespace {

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Plot {
  std::string table, x, y, extra;  // extra: third using column for error bars or colour
  bool logy = false;
  std::string style = "points";
};

std::vector<Plot> plots_for(const std::string& kind) {
  if (kind == "ipeps-fixed-point")
    return {{"spectrum.csv", "i", "(column('sigma')**2)", "", true},
            {"convergence.csv", "chi", "one_minus_fidelity_ref", "", true}};
  if (kind == "rho-convergence") return {{"rho.csv", "chi", "delta_rho", "region", true, "points palette"}};
  if (kind == "correlation-length") return {{"xi.csv", "D", "xi", "chi", false, "points palette"}};
  if (kind == "barrier-stabilizer") return {{"summary.csv", "y", "mean_S_logp", "std_S_logp", false, "yerrorbars"}};
  if (kind == "barrier-dense") return {{"summary.csv", "y", "mean_S", "std_S", false, "yerrorbars"}};
  if (kind == "overlap-eta") return {{"summary.csv", "y", "mean_S", "eta", false, "points palette"}};
  if (kind == "statmech-exact") return {{"exact.csv", "D", "entropy", "d", false, "points palette"}};
  if (kind == "wick-oracle") return {{"oracle.csv", "seed", "estimate", "stderr", false, "yerrorbars"}};
  return {};
}

std::string using_column(const std::string& c) { return c.front() == '(' ? c : "'" + c + "'"; }

}  // namespace

std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* u = std::get_if<std::uint64_t>(&c)) return std::to_string(*u);
  if (const auto* s = std::get_if<std::string>(&c)) return quoted(*s);
  double v = std::get<double>(c);
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add(std::vector<Cell> row) {
  if (row.size() != header_.size()) throw DimensionError(file_ + ": row width differs from the header");
  rows_.push_back(std::move(row));
}

void Table::append(const Table& other) {
  if (other.header_ != header_) throw DimensionError(file_ + ": appended table has another header");
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

std::size_t Table::column(const std::string& name) const {
  auto it = std::find(header_.begin(), header_.end(), name);
  if (it == header_.end()) throw DimensionError(file_ + ": no column " + name);
  return static_cast<std::size_t>(it - header_.begin());
}

std::string Table::render() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + quoted(header_[i]);
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_atomic(const std::filesystem::path& file, const std::string& content) {
  std::filesystem::path tmp = file;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot write " + tmp.string());
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    os.flush();
    if (!os) throw Error("short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, file, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + file.string() + ": " + ec.message());
  }
}

std::string plot_script(const std::string& kind, const std::vector<Table>& tables) {
  std::ostringstream os;
  os << "# gnuplot script; run from this directory with `gnuplot plot.gp`\n";
  os << "set datafile separator ','\n";
  os << "set key autotitle columnhead\n";
  os << "set terminal pngcairo size 900,600\n";
  for (const Plot& p : plots_for(kind)) {
    bool present = false;
    for (const auto& t : tables) present = present || t.file() == p.table;
    if (!present) continue;
    const std::string stem = p.table.substr(0, p.table.size() - 4);
    os << "\nset output '" << stem << ".png'\n";
    os << (p.logy ? "set logscale y\n" : "unset logscale y\n");
    os << "set xlabel '" << p.x << "'\n";
    os << "set ylabel '" << (p.y.front() == '(' ? "sigma^2" : p.y) << "'\n";
    os << "plot '" << p.table << "' using " << using_column(p.x) << ":" << using_column(p.y);
    if (!p.extra.empty()) os << ":" << using_column(p.extra);
    os << " with " << p.style << " title '" << kind << "'\n";
  }
  return os.str();
}

}  // namespace pepslab::detail
