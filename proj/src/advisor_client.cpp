#include "ixtune/advisor_client.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>

#include "httplib.h"
#include "ixtune/errors.hpp"
#include "ixtune/util.hpp"

namespace ixtune {

using nlohmann::json;
namespace u = util;
namespace fs = std::filesystem;

AdvisorEndpoint AdvisorEndpoint::from_env() {
  AdvisorEndpoint ep;
  if (const char* url = std::getenv("ADVISOR_URL")) ep.url = url;
  if (const char* key = std::getenv("ADVISOR_KEY")) ep.api_key = key;
  if (const char* dir = std::getenv("ADVISOR_FIXTURES")) ep.fixtures_dir = dir;
  return ep;
}

namespace {

/// Returns the end index (one past) of the JSON value starting at `start`,
/// or npos if brackets never balance.
size_t find_balanced_end(const std::string& text, size_t start) {
  int depth = 0;
  bool in_string = false;
  for (size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\')
        ++i;
      else if (c == '"')
        in_string = false;
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      ++depth;
    } else if (c == ']' || c == '}') {
      --depth;
      if (depth == 0) return i + 1;
    }
  }
  return std::string::npos;
}

std::optional<json> extract_payload(const std::string& raw, size_t& payload_begin) {
  for (size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '[' && raw[i] != '{') continue;
    const size_t end = find_balanced_end(raw, i);
    if (end == std::string::npos) continue;
    json value = json::parse(raw.substr(i, end - i), nullptr, false);
    if (value.is_discarded()) continue;
    payload_begin = i;
    return value;
  }
  return std::nullopt;
}

}  // namespace

ParsedRecommendations parse_response(const std::string& raw, const Catalog& catalog) {
  size_t payload_begin = 0;
  auto payload = extract_payload(raw, payload_begin);
  if (!payload)
    throw InputError("advisor response contains no JSON recommendation payload");

  json entries = json::array();
  if (payload->is_array()) {
    entries = *payload;
  } else if (payload->contains("indexes") && (*payload)["indexes"].is_array()) {
    entries = (*payload)["indexes"];
  } else {
    entries.push_back(*payload);  // a single bare recommendation object
  }

  ParsedRecommendations result;
  const std::string prose = u::trim(raw.substr(0, payload_begin));
  if (!prose.empty()) result.rationale = prose;

  for (const auto& entry : entries) {
    IndexDefinition index;
    try {
      index = index_from_json(entry);
    } catch (const InputError& e) {
      result.dropped.push_back(std::string("unparseable entry: ") + e.what());
      continue;
    }
    const auto violations = validate_index(catalog, index);
    if (!violations.empty()) {
      result.dropped.push_back("rejected index on '" + index.table +
                               "': " + u::join(violations, "; "));
      continue;
    }
    if (index.name.empty()) index.name = "llm_" + index.table + "_" + index.digest8();
    result.indexes.push_back(std::move(index));
  }
  return result;
}

std::vector<IndexDefinition> enforce_constraints(std::vector<IndexDefinition> parsed,
                                                 std::optional<int> k) {
  std::vector<IndexDefinition> distinct;
  for (auto& index : parsed) {
    const bool dup = std::any_of(distinct.begin(), distinct.end(), [&](const IndexDefinition& d) {
      return d.structurally_equal(index);
    });
    if (!dup) distinct.push_back(std::move(index));
  }
  if (k && static_cast<int>(distinct.size()) > *k)
    throw InputError("advisor recommended " + std::to_string(distinct.size()) +
                     " distinct indexes, exceeding the allowed " + std::to_string(*k));
  return distinct;
}

namespace {

std::string fetch_from_fixtures(const std::string& dir, const PromptBundle& prompt) {
  const fs::path path = fs::path(dir) / (prompt.digest() + ".txt");
  if (!fs::exists(path))
    throw ServiceError("no fixture response for prompt digest " + prompt.digest() +
                       " under " + dir);
  return u::read_file(path.string());
}

std::string fetch_from_service(const AdvisorEndpoint& endpoint, const PromptBundle& prompt) {
  const auto scheme_end = endpoint.url.find("://");
  if (scheme_end == std::string::npos)
    throw ServiceError("advisor URL must include a scheme: " + endpoint.url);
  const size_t path_start = endpoint.url.find('/', scheme_end + 3);
  const std::string base =
      path_start == std::string::npos ? endpoint.url : endpoint.url.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : endpoint.url.substr(path_start);

  httplib::Client client(base);
  client.set_read_timeout(600, 0);  // advisory services can be slow
  httplib::Headers headers;
  if (!endpoint.api_key.empty())
    headers.emplace("Authorization", "Bearer " + endpoint.api_key);

  const json body{{"prompt", prompt.text}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res)
    throw ServiceError("advisor request failed: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ServiceError("advisor returned HTTP " + std::to_string(res->status));
  json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("text") || !reply["text"].is_string())
    throw ServiceError("advisor reply is not a {\"text\": ...} document");
  return reply["text"].get<std::string>();
}

}  // namespace

std::vector<AdvisorResponse> request_recommendations(const AdvisorEndpoint& endpoint,
                                                     const PromptBundle& prompt, int n,
                                                     const Catalog& catalog) {
  if (n < 1) throw InputError("advisor: invocation count must be >= 1");
  if (!endpoint.fixtures_dir && endpoint.url.empty())
    throw ServiceError("advisor: neither a service URL nor a fixtures directory is configured");

  std::vector<AdvisorResponse> responses;
  responses.reserve(static_cast<size_t>(n));
  for (int i = 1; i <= n; ++i) {
    AdvisorResponse response;
    response.invocation_id = i;
    const auto start = std::chrono::steady_clock::now();
    try {
      response.raw_text = endpoint.fixtures_dir
                              ? fetch_from_fixtures(*endpoint.fixtures_dir, prompt)
                              : fetch_from_service(endpoint, prompt);
      auto parsed = parse_response(response.raw_text, catalog);
      response.parsed = std::move(parsed.indexes);
      response.rationale = std::move(parsed.rationale);
      response.dropped = std::move(parsed.dropped);
    } catch (const Error& e) {
      response.error = e.what();
    }
    response.latency_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    responses.push_back(std::move(response));
  }
  return responses;
}

CandidatePool pool_from_responses(const std::vector<AdvisorResponse>& responses,
                                  const std::string& source) {
  CandidatePool pool;
  for (const auto& response : responses)
    for (const auto& index : response.parsed) pool.add(index, source);
  return pool;
}

}  // namespace ixtune
