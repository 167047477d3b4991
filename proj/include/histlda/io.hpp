#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "histlda/gibbs.hpp"
#include "histlda/model.hpp"

namespace histlda {

/// Malformed or out-of-range input data. `row` is the 1-based line number in
/// the file (the header is line 1), or 0 when not tied to a row.
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& message, std::size_t row = 0)
      : std::runtime_error(message), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// A collection read from `unit_id,t` CSV. Unit ids are opaque strings mapped
/// to contiguous indices in order of first appearance.
struct LabeledCollection {
  Collection collection;
  std::vector<std::string> unit_ids;
};

LabeledCollection read_data_csv(std::istream& in, const Range& range);
LabeledCollection read_data_csv_file(const std::string& path, const Range& range);
void write_data_csv(std::ostream& out, const Collection& c,
                    const std::vector<std::string>& unit_ids);

/// Persisted fit: estimates, unit ids and the configuration that produced them.
struct ModelFile {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::vector<std::string> unit_ids;
  FitResult fit;  // traces are not persisted
  FitConfig config;

  /// Index of a unit id; throws std::out_of_range when unknown.
  std::size_t unit_index(const std::string& id) const;
};

std::string model_to_json(const ModelFile& model);
/// Throws DataError on schema violations.
ModelFile model_from_json(const std::string& text);

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

/// "t0,t1" -> Range. Throws std::invalid_argument.
Range parse_range(const std::string& text);

}  // namespace histlda
