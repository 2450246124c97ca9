#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "pepslab/experiment.hpp"

namespace pepslab::detail {

enum class ParamType { Int, Number, Bool, String, IntList, NumberList };

struct ParamSpec {
  std::string key;
  ParamType type;
  bool required = false;
  Json fallback;  // null: optional without a default
};

struct KindSpec {
  std::string name;
  bool seeded = true;  // false: seeds are ignored
  std::vector<ParamSpec> params;
};

const std::vector<KindSpec>& kind_specs();
const KindSpec* find_kind(const std::string& name);

// Scalars given for list parameters are wrapped into one-element lists.
Json resolve_parameters(const KindSpec& spec, const Json& given);

using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

std::string format_cell(const Cell& c);

class Table {
 public:
  Table(std::string file, std::vector<std::string> header) : file_(std::move(file)), header_(std::move(header)) {}

  void add(std::vector<Cell> row);
  void append(const Table& other);

  const std::string& file() const { return file_; }
  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::vector<Cell>>& data() const { return rows_; }
  std::size_t column(const std::string& name) const;
  std::string render() const;

 private:
  std::string file_;
  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

// Writes to a temporary sibling and renames it over `file`.
void write_atomic(const std::filesystem::path& file, const std::string& content);

std::string plot_script(const std::string& kind, const std::vector<Table>& tables);

}  // namespace pepslab::detail
