#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ixtune/catalog.hpp"
#include "ixtune/enumerator.hpp"
#include "ixtune/prompt_builder.hpp"

namespace ixtune {

/// Where recommendations come from: an HTTP service, or a directory of
/// canned responses keyed by prompt digest for offline runs.
struct AdvisorEndpoint {
  std::string url;      // e.g. http://host:port/advise
  std::string api_key;  // sent as a bearer token when non-empty
  std::optional<std::string> fixtures_dir;

  /// Reads ADVISOR_URL, ADVISOR_KEY, ADVISOR_FIXTURES.
  static AdvisorEndpoint from_env();
};

struct AdvisorResponse {
  int invocation_id = 0;
  std::string raw_text;
  std::vector<IndexDefinition> parsed;  // each passes catalog validation
  std::optional<std::string> rationale;
  double latency_seconds = 0.0;
  std::optional<std::string> error;     // transport or parse failure
  std::vector<std::string> dropped;     // per-entry validation reports
};

struct ParsedRecommendations {
  std::vector<IndexDefinition> indexes;
  std::optional<std::string> rationale;
  std::vector<std::string> dropped;
};

/// Extracts the recommendation payload from free-form response text by
/// locating the outermost JSON array (or object) in it. Entries that fail
/// catalog validation are dropped and reported, not fatal. Throws
/// InputError when no JSON payload exists at all.
ParsedRecommendations parse_response(const std::string& raw, const Catalog& catalog);

/// Structural dedup plus constraint check: more than k distinct indexes is
/// an error, never a silent truncation.
std::vector<IndexDefinition> enforce_constraints(std::vector<IndexDefinition> parsed,
                                                 std::optional<int> k);

/// Issues n independent requests (no shared conversation state). Transport
/// or parse failures are captured per invocation; the rest proceed.
std::vector<AdvisorResponse> request_recommendations(const AdvisorEndpoint& endpoint,
                                                     const PromptBundle& prompt, int n,
                                                     const Catalog& catalog);

/// Union of every parsed index across responses, tagged by source.
CandidatePool pool_from_responses(const std::vector<AdvisorResponse>& responses,
                                  const std::string& source = "llm");

}  // namespace ixtune
