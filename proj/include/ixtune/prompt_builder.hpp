#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ixtune/catalog.hpp"
#include "ixtune/plan.hpp"

namespace ixtune {

enum class PromptKind { Single, Multi };

struct PromptBundle {
  std::string text;
  PromptKind kind = PromptKind::Single;
  std::vector<std::string> query_ids;
  std::optional<int> k_constraint;  // multi prompts only

  /// Advisory size; no limit is enforced.
  std::size_t char_count() const { return text.size(); }
  std::string digest() const;
};

/// Schema text for exactly the given base tables (catalog order), followed
/// by the definition of every catalog view whose name appears as an
/// identifier in the query text.
std::string render_schema_block(const Catalog& catalog,
                                const std::set<std::string>& tables,
                                const std::string& query_sql);

/// One per-query section: schema, SQL text, execution plan table.
std::string render_query_block(const std::string& query_sql, const Catalog& catalog,
                               const PlanTree& plan);

PromptBundle build_single_query_prompt(const std::string& query_sql,
                                       const Catalog& catalog, const PlanTree& plan);

PromptBundle build_multi_query_prompt(
    const std::vector<std::pair<std::string, PlanTree>>& queries,
    const Catalog& catalog, int k);

}  // namespace ixtune
