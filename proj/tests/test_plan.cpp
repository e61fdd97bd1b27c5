#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "ixtune/errors.hpp"
#include "ixtune/plan.hpp"
#include "ixtune/util.hpp"
#include "support/plan_generator.hpp"
#include "support/test_paths.hpp"

using namespace ixtune;

namespace {

Catalog two_tables() {
  return load_catalog(R"({
    "tables": [
      {"name":"T","row_count":100,"columns":[{"name":"a","type":"INT"},{"name":"b","type":"INT"}]},
      {"name":"U","row_count":50,"columns":[{"name":"x","type":"INT"}]}
    ],
    "views": [{"name":"V","definition":"SELECT a FROM T"}]
  })");
}

double sum_self_costs(const PlanNode& node) {
  double total = node.self_cost;
  for (const auto& child : node.children) total += sum_self_costs(child);
  return total;
}

void walk_tables(const PlanNode& node, std::set<std::string>& out) {
  if ((node.op == OpKind::Scan || node.op == OpKind::IndexSeek) && node.table)
    out.insert(*node.table);
  for (const auto& child : node.children) walk_tables(child, out);
}

void expected_depths(const PlanNode& node, int depth, std::vector<int>& out) {
  out.push_back(depth);
  for (const auto& child : node.children) expected_depths(child, depth + 1, out);
}

}  // namespace

TEST_CASE("single scan parses") {
  Catalog cat = two_tables();
  PlanTree plan = parse_plan(R"({
    "query_id": "q",
    "nodes": [{"id":0,"parent":null,"op":"Scan","table":"T","detail":"",
               "est_rows":100,"self_cost":10,"subtree_cost":10,
               "cols":{"all_ref":["T.a"]}}]
  })", cat);
  CHECK(plan.root.op == OpKind::Scan);
  CHECK(plan.root.children.empty());
  CHECK(total_cost(plan) == 10.0);
}

TEST_CASE("dangling parent is rejected") {
  Catalog cat = two_tables();
  CHECK_THROWS_WITH_AS(parse_plan(R"({
    "query_id": "q",
    "nodes": [
      {"id":0,"parent":null,"op":"Other","self_cost":0,"subtree_cost":10,"cols":{}},
      {"id":1,"parent":7,"op":"Scan","table":"T","self_cost":10,"subtree_cost":10,"cols":{}}
    ]
  })", cat), doctest::Contains("dangling"), InputError);
}

TEST_CASE("cost identity violations are rejected") {
  Catalog cat = two_tables();
  CHECK_THROWS_WITH_AS(parse_plan(R"({
    "query_id": "q",
    "nodes": [
      {"id":0,"parent":null,"op":"Other","self_cost":1,"subtree_cost":99,"cols":{}},
      {"id":1,"parent":0,"op":"Scan","table":"T","self_cost":10,"subtree_cost":10,"cols":{}}
    ]
  })", cat), doctest::Contains("subtree_cost"), InputError);
}

TEST_CASE("parent cycles leave nodes unreachable") {
  Catalog cat = two_tables();
  CHECK_THROWS_WITH_AS(parse_plan(R"({
    "query_id": "q",
    "nodes": [
      {"id":0,"parent":null,"op":"Scan","table":"T","self_cost":10,"subtree_cost":10,"cols":{}},
      {"id":1,"parent":2,"op":"Other","self_cost":0,"subtree_cost":0,"cols":{}},
      {"id":2,"parent":1,"op":"Other","self_cost":0,"subtree_cost":0,"cols":{}}
    ]
  })", cat), doctest::Contains("unreachable"), InputError);
}

TEST_CASE("structural errors: roots, tables, columns, duplicates") {
  Catalog cat = two_tables();
  // two roots
  CHECK_THROWS_WITH_AS(parse_plan(R"({"query_id":"q","nodes":[
    {"id":0,"parent":null,"op":"Scan","table":"T","self_cost":1,"subtree_cost":1,"cols":{}},
    {"id":1,"parent":null,"op":"Scan","table":"U","self_cost":1,"subtree_cost":1,"cols":{}}]})",
                                  cat),
                       doctest::Contains("multiple root"), InputError);
  // scan without a table
  CHECK_THROWS_WITH_AS(parse_plan(R"({"query_id":"q","nodes":[
    {"id":0,"parent":null,"op":"Scan","self_cost":1,"subtree_cost":1,"cols":{}}]})", cat),
                       doctest::Contains("no table"), InputError);
  // scan of a view
  CHECK_THROWS_WITH_AS(parse_plan(R"({"query_id":"q","nodes":[
    {"id":0,"parent":null,"op":"Scan","table":"V","self_cost":1,"subtree_cost":1,"cols":{}}]})",
                                  cat),
                       doctest::Contains("view"), InputError);
  // unresolvable column
  CHECK_THROWS_WITH_AS(parse_plan(R"({"query_id":"q","nodes":[
    {"id":0,"parent":null,"op":"Scan","table":"T","self_cost":1,"subtree_cost":1,
     "cols":{"all_ref":["T.zz"]}}]})", cat),
                       doctest::Contains("zz"), InputError);
  // duplicate column within a role list
  CHECK_THROWS_WITH_AS(parse_plan(R"({"query_id":"q","nodes":[
    {"id":0,"parent":null,"op":"Scan","table":"T","self_cost":1,"subtree_cost":1,
     "cols":{"predicate":["T.a","T.a"]}}]})", cat),
                       doctest::Contains("duplicate"), InputError);
  // unknown operator kind
  CHECK_THROWS_WITH_AS(parse_plan(R"({"query_id":"q","nodes":[
    {"id":0,"parent":null,"op":"Teleport","table":"T","self_cost":1,"subtree_cost":1,"cols":{}}]})",
                                  cat),
                       doctest::Contains("Teleport"), InputError);
}

TEST_CASE("referenced_tables has set semantics") {
  Catalog cat = two_tables();
  PlanTree plan = parse_plan(R"({"query_id":"q","nodes":[
    {"id":0,"parent":null,"op":"Join","self_cost":1,"subtree_cost":21,"cols":{}},
    {"id":1,"parent":0,"op":"Scan","table":"T","self_cost":10,"subtree_cost":10,"cols":{}},
    {"id":2,"parent":0,"op":"Scan","table":"U","self_cost":10,"subtree_cost":10,"cols":{}}]})",
                             cat);
  CHECK(referenced_tables(plan) == std::set<std::string>{"T", "U"});

  PlanTree twice = parse_plan(R"({"query_id":"q","nodes":[
    {"id":0,"parent":null,"op":"Join","self_cost":1,"subtree_cost":21,"cols":{}},
    {"id":1,"parent":0,"op":"Scan","table":"T","self_cost":10,"subtree_cost":10,"cols":{}},
    {"id":2,"parent":0,"op":"Scan","table":"T","self_cost":10,"subtree_cost":10,"cols":{}}]})",
                              cat);
  CHECK(referenced_tables(twice) == std::set<std::string>{"T"});
}

TEST_CASE("total_cost equals the sum of self costs on random trees") {
  testgen::Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Catalog cat = testgen::random_catalog(rng);
    PlanTree plan = testgen::random_plan(rng, cat);
    CHECK(total_cost(plan) == doctest::Approx(sum_self_costs(plan.root)).epsilon(1e-12));
  }
}

TEST_CASE("referenced_tables matches an exhaustive walk on random trees") {
  testgen::Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    Catalog cat = testgen::random_catalog(rng);
    PlanTree plan = testgen::random_plan(rng, cat);
    std::set<std::string> expected;
    walk_tables(plan.root, expected);
    CHECK(referenced_tables(plan) == expected);
  }
}

TEST_CASE("plan json round-trips") {
  testgen::Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    Catalog cat = testgen::random_catalog(rng);
    PlanTree plan = testgen::random_plan(rng, cat);
    PlanTree back = parse_plan(render_plan_json(plan), cat);
    CHECK(back == plan);
  }
}

TEST_CASE("generated random trees pass validation") {
  testgen::Rng rng(19);
  for (int trial = 0; trial < 50; ++trial) {
    Catalog cat = testgen::random_catalog(rng);
    PlanTree plan = testgen::random_plan(rng, cat);
    CHECK_NOTHROW(validate_plan(plan));
  }
}

TEST_CASE("plan table rendering is deterministic and depth-indented") {
  Catalog cat =
      load_catalog(util::read_file(testpaths::fixture("catalog_tpch.json")));
  PlanTree plan =
      parse_plan(util::read_file(testpaths::fixture("plans/q04.json")), cat);

  const std::string a = render_plan_table(plan);
  const std::string b = render_plan_table(plan);
  CHECK(a == b);

  // one header plus one row per operator, in pre-order
  std::vector<std::string> lines;
  size_t pos = 0;
  while (pos < a.size()) {
    const size_t nl = a.find('\n', pos);
    lines.push_back(a.substr(pos, nl - pos));
    pos = nl + 1;
  }
  REQUIRE(lines.size() == 8);

  std::vector<int> depths;
  expected_depths(plan.root, 0, depths);
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    const size_t bar = line.find('|');
    size_t indent = 0;
    while (line[bar + 2 + indent] == ' ') ++indent;
    CHECK(static_cast<int>(indent) == 2 * depths[i - 1]);
  }
}

TEST_CASE("single scan renders one data row") {
  Catalog cat = two_tables();
  PlanTree plan = parse_plan(R"({"query_id":"q","nodes":[
    {"id":0,"parent":null,"op":"Scan","table":"T","self_cost":10,"subtree_cost":10,"cols":{}}]})",
                             cat);
  const std::string text = render_plan_table(plan);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);  // header + 1 row
  CHECK(text.find("Scan") != std::string::npos);
}

namespace {
// Identity of everything the table view shows: structure, kinds, costs.
void visible_identity(const PlanNode& node, std::string& out) {
  out += std::to_string(node.node_id) + ":" + std::string(op_kind_name(node.op)) + ":" +
         node.detail + ":" + util::format_number(node.est_rows) + ":" +
         util::format_number(node.self_cost) + ":" + util::format_number(node.subtree_cost) +
         "(";
  for (const auto& child : node.children) visible_identity(child, out);
  out += ")";
}
}  // namespace

TEST_CASE("trees with distinct visible content render distinct text") {
  testgen::Rng rng(23);
  std::map<std::string, std::string> rendered_by_identity;
  for (int trial = 0; trial < 60; ++trial) {
    Catalog cat = testgen::random_catalog(rng);
    PlanTree plan = testgen::random_plan(rng, cat);
    std::string key;
    visible_identity(plan.root, key);
    const std::string text = render_plan_table(plan);
    auto [it, inserted] = rendered_by_identity.emplace(key, text);
    if (!inserted) {
      CHECK(it->second == text);  // same visible content, same bytes
    } else {
      for (const auto& [other_key, other_text] : rendered_by_identity)
        if (other_key != key) CHECK(other_text != text);
    }
  }
}
