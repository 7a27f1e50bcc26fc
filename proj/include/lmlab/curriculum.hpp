#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmlab/rational.hpp"

namespace lmlab::curriculum {

enum class Tier { kHQ, kMQ };

std::string tier_name(Tier t);
Tier tier_from(const std::string& s);

struct Document {
    std::string doc_id;
    std::int64_t token_count = 0;
};

struct Pool {
    std::string pool_id;
    Tier tier = Tier::kMQ;
    std::vector<Document> documents;

    std::int64_t token_total() const;
    // token_count >= 1 per document, doc_ids unique within the pool.
    void validate() const;
    // All documents share one token_count; required for fractional epochs.
    bool uniform_doc_tokens() const;
};

struct Allocation {
    std::string pool_id;
    Rational epochs;  // positive; fractional part consumes a permutation prefix
};

struct ManifestStage {
    std::string name;
    std::int64_t token_budget = 0;
    std::vector<Allocation> allocations;
};

// Ordered stages binding token budgets to quality-tiered pools. The token
// budget of every stage equals the exact rational sum of epochs x pool
// tokens, and the HQ token fraction is non-decreasing across stages.
struct CurriculumManifest {
    std::vector<ManifestStage> stages;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static CurriculumManifest from_json(const nlohmann::json& j);
};

using PoolMap = std::map<std::string, Pool>;

PoolMap pool_map(const std::vector<Pool>& pools);

// Tokenizer contract: text -> positive token count.
using Tokenizer = std::function<std::int64_t(const std::string&)>;
std::int64_t whitespace_token_count(const std::string& text);

// Reads JSONL records {"id","text","tier"}; all records must carry the
// same tier. token_count comes from the tokenizer (whitespace default).
Pool load_pool_jsonl(const std::string& path, const std::string& pool_id,
                     const Tokenizer& tokenizer = whitespace_token_count);

struct StageSpec {
    std::string name;
    std::vector<Allocation> allocations;
};

// Single stage holding every epoch of both pools, shuffled uniformly
// together on replay. Epoch counts may be zero for one pool, not both.
CurriculumManifest plan_vanilla_wsd(const Pool& hq, const Pool& mq, const Rational& hq_epochs,
                                    const Rational& mq_epochs, std::uint64_t seed);

// Multi-stage quality-progressive manifest. Throws ValidationError naming
// the offending stages when HQ fractions decrease.
CurriculumManifest plan_fg_wsd(const Pool& hq, const Pool& mq,
                               const std::vector<StageSpec>& stage_specs, std::uint64_t seed);

// Full manifest validation against pools: budget exactness, quality
// progression, fractional-epoch feasibility, pool resolution.
void validate_manifest(const CurriculumManifest& manifest, const PoolMap& pools);

struct ReplayItem {
    std::string doc_id;
    std::string stage_name;
    std::int64_t token_count = 0;
};

// Deterministic document stream: per stage, integer epochs contribute whole
// pool copies and a fractional epoch contributes a prefix of a fresh
// permutation cut exactly at its token share; the stage's documents are then
// shuffled uniformly together. Stages are emitted strictly in order.
std::vector<ReplayItem> replay(const CurriculumManifest& manifest, const PoolMap& pools,
                               std::uint64_t seed);

struct StageAccount {
    std::string name;
    std::int64_t tokens = 0;
    Rational hq_fraction;  // allocated HQ tokens / stage budget
};

struct AccountingReport {
    std::vector<StageAccount> stages;
    std::map<std::string, Rational> pool_epochs;  // consumed epochs per pool
    std::int64_t total_tokens = 0;

    nlohmann::json to_json() const;
};

// Exact integer/rational token accounting; no floating point in sums.
AccountingReport accounting(const CurriculumManifest& manifest, const PoolMap& pools);

}  // namespace lmlab::curriculum
