#include "ixtune/configuration.hpp"

#include <algorithm>

#include "ixtune/errors.hpp"
#include "ixtune/util.hpp"

namespace ixtune {

using nlohmann::json;
namespace u = util;

namespace {
bool canonical_less(const IndexDefinition& a, const IndexDefinition& b) {
  if (!u::ieq(a.table, b.table)) return u::iless(a.table, b.table);
  return a.structural_key() < b.structural_key();
}
}  // namespace

void Configuration::add(IndexDefinition index) {
  if (contains(index)) return;
  index.normalize();
  auto pos = std::lower_bound(indexes.begin(), indexes.end(), index, canonical_less);
  indexes.insert(pos, std::move(index));
}

bool Configuration::contains(const IndexDefinition& index) const {
  const std::string key = index.structural_key();
  return std::any_of(indexes.begin(), indexes.end(),
                     [&](const IndexDefinition& i) { return i.structural_key() == key; });
}

std::string Configuration::digest() const {
  std::string blob;
  for (const auto& i : indexes) {
    blob += i.structural_key();
    blob += '\n';
  }
  return u::to_hex(u::fnv1a64(blob), 16);
}

json Configuration::to_json(std::optional<double> estimated_cost) const {
  json arr = json::array();
  for (const auto& i : indexes) arr.push_back(index_to_json(i));
  json doc{{"k", constraint_k}, {"indexes", arr}};
  if (estimated_cost) doc["estimated_workload_cost"] = *estimated_cost;
  return doc;
}

Configuration Configuration::from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("configuration: expected a JSON object");
  Configuration config;
  if (!doc.contains("k") || !doc["k"].is_number_integer() || doc["k"].get<int>() < 1)
    throw InputError("configuration: 'k' must be a positive integer");
  config.constraint_k = doc["k"].get<int>();
  for (const auto& entry : doc.value("indexes", json::array()))
    config.add(index_from_json(entry));
  if (!config.within_constraint())
    throw InputError("configuration: " + std::to_string(config.indexes.size()) +
                     " indexes exceed constraint k=" + std::to_string(config.constraint_k));
  return config;
}

}  // namespace ixtune
