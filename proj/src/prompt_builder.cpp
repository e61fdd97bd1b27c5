#include "ixtune/prompt_builder.hpp"

#include "ixtune/errors.hpp"
#include "ixtune/util.hpp"
#include "prompt_templates_data.hpp"

namespace ixtune {

namespace u = util;

std::string PromptBundle::digest() const { return u::to_hex(u::fnv1a64(text), 16); }

std::string render_schema_block(const Catalog& catalog,
                                const std::set<std::string>& tables,
                                const std::string& query_sql) {
  std::string out;
  for (const auto& table : catalog.tables) {
    if (!tables.count(table.name)) continue;
    out += "Table " + table.name + " (rows = " + std::to_string(table.row_count) + ")\n";
    out += "  columns:";
    for (size_t i = 0; i < table.columns.size(); ++i) {
      out += i ? ", " : " ";
      out += table.columns[i].name;
      if (!table.columns[i].type.empty()) out += " " + table.columns[i].type;
    }
    out += "\n";
    const auto indexes = catalog.indexes_on(table.name);
    if (indexes.empty()) {
      out += "  pre-existing indexes: none\n";
    } else {
      out += "  pre-existing indexes:\n";
      for (const auto* idx : indexes) {
        out += "    " + (idx->name.empty() ? idx->digest8() : idx->name) + ": keys (" +
               u::join(idx->key_columns, ", ") + ")";
        if (!idx->included_columns.empty())
          out += " include (" + u::join(idx->included_columns, ", ") + ")";
        out += "\n";
      }
    }
  }
  for (const auto& view : catalog.views) {
    if (!u::contains_identifier(query_sql, view.name)) continue;
    out += "View " + view.name + ":\n";
    out += "  " + view.definition + "\n";
  }
  return out;
}

std::string render_query_block(const std::string& query_sql, const Catalog& catalog,
                               const PlanTree& plan) {
  const auto tables = referenced_tables(plan);
  for (const auto& table : tables)
    if (!catalog.find_table(table))
      throw InputError("prompt: plan references table '" + table + "' missing from catalog");

  std::string block = detail::kQueryBlockTemplate;
  block = u::replace_placeholder(std::move(block), "query_id", plan.query_id);
  block = u::replace_placeholder(std::move(block), "schema",
                                 render_schema_block(catalog, tables, query_sql));
  block = u::replace_placeholder(std::move(block), "query_sql", query_sql);
  block = u::replace_placeholder(std::move(block), "plan_table", render_plan_table(plan));
  return block;
}

PromptBundle build_single_query_prompt(const std::string& query_sql,
                                       const Catalog& catalog, const PlanTree& plan) {
  PromptBundle bundle;
  bundle.kind = PromptKind::Single;
  bundle.query_ids.push_back(plan.query_id);
  bundle.text = u::replace_placeholder(detail::kSingleQueryTemplate, "query_blocks",
                                       render_query_block(query_sql, catalog, plan));
  return bundle;
}

PromptBundle build_multi_query_prompt(
    const std::vector<std::pair<std::string, PlanTree>>& queries,
    const Catalog& catalog, int k) {
  if (queries.empty()) throw InputError("prompt: multi-query prompt needs at least one query");
  if (k < 1) throw InputError("prompt: max index count must be >= 1");

  PromptBundle bundle;
  bundle.kind = PromptKind::Multi;
  bundle.k_constraint = k;

  // Complete blocks concatenated in input order; nothing is elided.
  std::string blocks;
  for (size_t i = 0; i < queries.size(); ++i) {
    if (i) blocks += "\n";
    bundle.query_ids.push_back(queries[i].second.query_id);
    blocks += render_query_block(queries[i].first, catalog, queries[i].second);
  }

  std::string text = detail::kMultiQueryTemplate;
  text = u::replace_placeholder(std::move(text), "workload_size",
                                std::to_string(queries.size()));
  text = u::replace_placeholder(std::move(text), "max_indexes", std::to_string(k));
  text = u::replace_placeholder(std::move(text), "query_blocks", blocks);
  bundle.text = std::move(text);
  return bundle;
}

}  // namespace ixtune
