#include "lmlab/curriculum.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "lmlab/errors.hpp"
#include "lmlab/jsonl.hpp"
#include "lmlab/rng.hpp"

namespace lmlab::curriculum {

std::string tier_name(Tier t) { return t == Tier::kHQ ? "HQ" : "MQ"; }

Tier tier_from(const std::string& s) {
    if (s == "HQ") return Tier::kHQ;
    if (s == "MQ") return Tier::kMQ;
    throw ValidationError("unknown tier: " + s);
}

std::int64_t Pool::token_total() const {
    std::int64_t total = 0;
    for (const auto& d : documents) total += d.token_count;
    return total;
}

void Pool::validate() const {
    std::set<std::string> ids;
    for (const auto& d : documents) {
        if (d.token_count < 1) {
            throw ValidationError("pool '" + pool_id + "': document '" + d.doc_id +
                                  "' has token_count < 1");
        }
        if (!ids.insert(d.doc_id).second) {
            throw ValidationError("pool '" + pool_id + "': duplicate doc_id '" + d.doc_id + "'");
        }
    }
}

bool Pool::uniform_doc_tokens() const {
    for (const auto& d : documents) {
        if (d.token_count != documents.front().token_count) return false;
    }
    return !documents.empty();
}

PoolMap pool_map(const std::vector<Pool>& pools) {
    PoolMap map;
    for (const auto& p : pools) {
        if (!map.emplace(p.pool_id, p).second) {
            throw ValidationError("duplicate pool_id: " + p.pool_id);
        }
    }
    return map;
}

std::int64_t whitespace_token_count(const std::string& text) {
    std::int64_t count = 0;
    bool in_word = false;
    for (const char c : text) {
        const bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_word) ++count;
        in_word = !ws;
    }
    return count;
}

Pool load_pool_jsonl(const std::string& path, const std::string& pool_id,
                     const Tokenizer& tokenizer) {
    Pool pool;
    pool.pool_id = pool_id;
    bool tier_set = false;
    for_each_jsonl(path, [&](const json& obj) {
        Document doc;
        doc.doc_id = obj.at("id").get<std::string>();
        doc.token_count = tokenizer(obj.at("text").get<std::string>());
        if (doc.token_count < 1) {
            throw ValidationError(path + ": document '" + doc.doc_id + "' tokenizes to zero tokens");
        }
        const Tier tier = tier_from(obj.at("tier").get<std::string>());
        if (!tier_set) {
            pool.tier = tier;
            tier_set = true;
        } else if (tier != pool.tier) {
            throw ValidationError(path + ": mixed tiers within one pool (doc '" + doc.doc_id + "')");
        }
        pool.documents.push_back(std::move(doc));
    });
    if (pool.documents.empty()) throw ValidationError(path + ": pool is empty");
    pool.validate();
    return pool;
}

namespace {

json rational_json(const Rational& r) { return {{"num", r.num()}, {"den", r.den()}}; }

Rational rational_from_json(const json& j) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
    return Rational(j.at("num").get<std::int64_t>(), j.at("den").get<std::int64_t>());
}

// Exact token share of one allocation; must be a nonnegative integer.
std::int64_t allocation_tokens(const Allocation& alloc, const Pool& pool) {
    const Rational share = alloc.epochs * Rational(pool.token_total());
    if (!share.is_integer()) {
        throw ValidationError("allocation of pool '" + alloc.pool_id + "' with epochs " +
                              alloc.epochs.str() + " yields a fractional token share " + share.str());
    }
    return share.num();
}

const Pool& resolve_pool(const PoolMap& pools, const std::string& pool_id) {
    const auto it = pools.find(pool_id);
    if (it == pools.end()) throw ValidationError("manifest references missing pool '" + pool_id + "'");
    return it->second;
}

Rational stage_hq_fraction(const ManifestStage& stage, const PoolMap& pools) {
    Rational hq_tokens(0);
    for (const auto& alloc : stage.allocations) {
        const Pool& pool = resolve_pool(pools, alloc.pool_id);
        if (pool.tier == Tier::kHQ) {
            hq_tokens = hq_tokens + alloc.epochs * Rational(pool.token_total());
        }
    }
    return hq_tokens / Rational(stage.token_budget);
}

void check_fractional_feasibility(const Allocation& alloc, const Pool& pool) {
    const std::int64_t whole = alloc.epochs.num() / alloc.epochs.den();
    const Rational frac = alloc.epochs - Rational(whole);
    if (frac.is_zero()) return;
    const Rational frac_share = frac * Rational(pool.token_total());
    if (!frac_share.is_integer()) {
        throw ValidationError("fractional epochs " + alloc.epochs.str() + " of pool '" +
                              alloc.pool_id + "' do not land on a whole token count");
    }
    if (!pool.uniform_doc_tokens()) {
        throw ValidationError("fractional epochs over pool '" + alloc.pool_id +
                              "' require uniform document token counts");
    }
    const std::int64_t doc_tokens = pool.documents.front().token_count;
    if (frac_share.num() % doc_tokens != 0) {
        throw ValidationError("fractional token share " + frac_share.str() + " of pool '" +
                              alloc.pool_id + "' does not align to document boundaries (" +
                              std::to_string(doc_tokens) + " tokens/doc)");
    }
}

}  // namespace

void validate_manifest(const CurriculumManifest& manifest, const PoolMap& pools) {
    if (manifest.stages.empty()) throw ValidationError("manifest has no stages");
    std::set<std::string> names;
    for (const auto& stage : manifest.stages) {
        if (!names.insert(stage.name).second) {
            throw ValidationError("duplicate stage name: " + stage.name);
        }
        if (stage.token_budget <= 0) {
            throw ValidationError("stage '" + stage.name + "' has nonpositive token_budget");
        }
        if (stage.allocations.empty()) {
            throw ValidationError("stage '" + stage.name + "' has no allocations");
        }
        Rational sum(0);
        for (const auto& alloc : stage.allocations) {
            const Pool& pool = resolve_pool(pools, alloc.pool_id);
            pool.validate();
            if (!(alloc.epochs > Rational(0))) {
                throw ValidationError("stage '" + stage.name + "': epochs must be positive");
            }
            check_fractional_feasibility(alloc, pool);
            sum = sum + alloc.epochs * Rational(pool.token_total());
        }
        if (sum != Rational(stage.token_budget)) {
            throw ValidationError("stage '" + stage.name + "': token_budget " +
                                  std::to_string(stage.token_budget) +
                                  " != allocated tokens " + sum.str());
        }
    }
    // Quality progression over allocated HQ token fractions.
    for (std::size_t i = 1; i < manifest.stages.size(); ++i) {
        const Rational prev = stage_hq_fraction(manifest.stages[i - 1], pools);
        const Rational cur = stage_hq_fraction(manifest.stages[i], pools);
        if (cur < prev) {
            throw ValidationError("quality progression violated: stage '" +
                                  manifest.stages[i - 1].name + "' has HQ fraction " + prev.str() +
                                  " but stage '" + manifest.stages[i].name + "' has " + cur.str());
        }
    }
}

CurriculumManifest plan_vanilla_wsd(const Pool& hq, const Pool& mq, const Rational& hq_epochs,
                                    const Rational& mq_epochs, std::uint64_t seed) {
    if (hq.documents.empty() || mq.documents.empty()) {
        throw ValidationError("pools must be nonempty");
    }
    if (hq_epochs.is_zero() && mq_epochs.is_zero()) {
        throw ValidationError("at least one pool needs nonzero epochs");
    }
    ManifestStage stage;
    stage.name = "uniform";
    Rational budget(0);
    if (!hq_epochs.is_zero()) {
        stage.allocations.push_back({hq.pool_id, hq_epochs});
        budget = budget + hq_epochs * Rational(hq.token_total());
    }
    if (!mq_epochs.is_zero()) {
        stage.allocations.push_back({mq.pool_id, mq_epochs});
        budget = budget + mq_epochs * Rational(mq.token_total());
    }
    if (!budget.is_integer()) {
        throw ValidationError("epoch counts yield a fractional total budget " + budget.str());
    }
    stage.token_budget = budget.num();

    CurriculumManifest manifest;
    manifest.seed = seed;
    manifest.stages.push_back(std::move(stage));
    validate_manifest(manifest, pool_map({hq, mq}));
    return manifest;
}

CurriculumManifest plan_fg_wsd(const Pool& hq, const Pool& mq,
                               const std::vector<StageSpec>& stage_specs, std::uint64_t seed) {
    if (stage_specs.empty()) throw ValidationError("stage_specs must be nonempty");
    const PoolMap pools = pool_map({hq, mq});
    CurriculumManifest manifest;
    manifest.seed = seed;
    for (const auto& spec : stage_specs) {
        ManifestStage stage;
        stage.name = spec.name;
        stage.allocations = spec.allocations;
        Rational budget(0);
        for (const auto& alloc : stage.allocations) {
            budget = budget + alloc.epochs * Rational(resolve_pool(pools, alloc.pool_id).token_total());
        }
        if (!budget.is_integer()) {
            throw ValidationError("stage '" + spec.name + "': fractional total budget " + budget.str());
        }
        stage.token_budget = budget.num();
        manifest.stages.push_back(std::move(stage));
    }
    validate_manifest(manifest, pools);
    return manifest;
}

std::vector<ReplayItem> replay(const CurriculumManifest& manifest, const PoolMap& pools,
                               std::uint64_t seed) {
    validate_manifest(manifest, pools);
    std::vector<ReplayItem> stream;
    for (const auto& stage : manifest.stages) {
        std::mt19937_64 gen(derive_seed(seed, stage.name));
        std::vector<const Document*> docs;
        for (const auto& alloc : stage.allocations) {
            const Pool& pool = resolve_pool(pools, alloc.pool_id);
            const std::int64_t whole = alloc.epochs.num() / alloc.epochs.den();
            for (std::int64_t e = 0; e < whole; ++e) {
                for (const auto& d : pool.documents) docs.push_back(&d);
            }
            const Rational frac = alloc.epochs - Rational(whole);
            if (!frac.is_zero()) {
                const std::int64_t frac_tokens = (frac * Rational(pool.token_total())).num();
                std::vector<const Document*> perm;
                perm.reserve(pool.documents.size());
                for (const auto& d : pool.documents) perm.push_back(&d);
                fisher_yates(perm, gen);
                std::int64_t taken = 0;
                for (const Document* d : perm) {
                    if (taken >= frac_tokens) break;
                    docs.push_back(d);
                    taken += d->token_count;
                }
                if (taken != frac_tokens) {
                    throw ValidationError("stage '" + stage.name + "': permutation prefix of pool '" +
                                          alloc.pool_id + "' cannot meet fractional share exactly");
                }
            }
        }
        fisher_yates(docs, gen);
        for (const Document* d : docs) {
            stream.push_back({d->doc_id, stage.name, d->token_count});
        }
    }
    return stream;
}

AccountingReport accounting(const CurriculumManifest& manifest, const PoolMap& pools) {
    validate_manifest(manifest, pools);
    AccountingReport report;
    for (const auto& stage : manifest.stages) {
        StageAccount account;
        account.name = stage.name;
        account.tokens = stage.token_budget;
        account.hq_fraction = stage_hq_fraction(stage, pools);
        report.stages.push_back(account);
        report.total_tokens += stage.token_budget;
        for (const auto& alloc : stage.allocations) {
            auto [it, inserted] = report.pool_epochs.emplace(alloc.pool_id, alloc.epochs);
            if (!inserted) it->second = it->second + alloc.epochs;
        }
    }
    return report;
}

nlohmann::json AccountingReport::to_json() const {
    json stage_array = json::array();
    for (const auto& s : stages) {
        stage_array.push_back({
            {"name", s.name},
            {"tokens", s.tokens},
            {"hq_fraction", rational_json(s.hq_fraction)},
        });
    }
    json epochs = json::object();
    for (const auto& [pool_id, consumed] : pool_epochs) {
        epochs[pool_id] = rational_json(consumed);
    }
    return {{"stages", stage_array}, {"pool_epochs", epochs}, {"total_tokens", total_tokens}};
}

nlohmann::json CurriculumManifest::to_json() const {
    json stage_array = json::array();
    for (const auto& s : stages) {
        json allocs = json::array();
        for (const auto& a : s.allocations) {
            allocs.push_back({{"pool_id", a.pool_id}, {"epochs", rational_json(a.epochs)}});
        }
        stage_array.push_back({
            {"name", s.name},
            {"token_budget", s.token_budget},
            {"allocations", allocs},
        });
    }
    return {{"stages", stage_array}, {"seed", seed}};
}

CurriculumManifest CurriculumManifest::from_json(const nlohmann::json& j) {
    CurriculumManifest manifest;
    try {
        manifest.seed = j.at("seed").get<std::uint64_t>();
        for (const auto& s : j.at("stages")) {
            ManifestStage stage;
            stage.name = s.at("name").get<std::string>();
            if (!s.at("token_budget").is_number_integer()) {
                throw ValidationError("token_budget must be an exact integer");
            }
            stage.token_budget = s.at("token_budget").get<std::int64_t>();
            for (const auto& a : s.at("allocations")) {
                stage.allocations.push_back(
                    {a.at("pool_id").get<std::string>(), rational_from_json(a.at("epochs"))});
            }
            manifest.stages.push_back(std::move(stage));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed manifest: ") + e.what());
    }
    return manifest;
}

}  // namespace lmlab::curriculum
