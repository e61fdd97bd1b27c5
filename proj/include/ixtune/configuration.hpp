#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ixtune/catalog.hpp"

namespace ixtune {

/// A set of indexes selected under a max-count constraint. Members are
/// kept in canonical order (table, then structural digest) and are
/// structurally unique.
struct Configuration {
  std::vector<IndexDefinition> indexes;
  int constraint_k = 1;

  /// Inserts unless a structurally equal index is already present.
  void add(IndexDefinition index);
  bool contains(const IndexDefinition& index) const;
  bool within_constraint() const {
    return static_cast<int>(indexes.size()) <= constraint_k;
  }

  /// Digest over the sorted structural keys of the members.
  std::string digest() const;

  nlohmann::json to_json(std::optional<double> estimated_cost = std::nullopt) const;
  static Configuration from_json(const nlohmann::json& doc);

  bool operator==(const Configuration&) const = default;
};

}  // namespace ixtune
