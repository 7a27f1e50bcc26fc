#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace lmlab::schedule {

enum class DecayShape { kCosine, kLinear };
enum class WarmupShape { kLinear };

struct StableStage {
    std::string name;
    std::int64_t tokens = 0;
};

// Piecewise learning-rate program over a cumulative-token axis:
// linear warmup, zero or more constant stable stages, smooth decay.
// Two or more stable stages is the fine-grained (FG-WSD) case.
struct SchedulePlan {
    double peak_lr = 0.0;
    double final_lr = 0.0;
    std::int64_t warmup_tokens = 0;
    std::vector<StableStage> stable_stages;
    std::int64_t decay_tokens = 0;
    DecayShape decay_shape = DecayShape::kCosine;
    WarmupShape warmup_shape = WarmupShape::kLinear;

    std::int64_t stable_tokens() const;
    std::int64_t total_tokens() const;

    // Throws ValidationError on nonpositive rates, final_lr > peak_lr,
    // nonpositive stage/decay budgets, or duplicate stage names.
    void validate() const;

    nlohmann::json to_json() const;
    static SchedulePlan from_json(const nlohmann::json& j);
};

enum class StageKind { kWarmup, kStable, kDecay };

struct StageInfo {
    StageKind kind = StageKind::kWarmup;
    std::string name;  // stable stage name; empty for warmup/decay
    std::int64_t stage_start = 0;  // inclusive
    std::int64_t stage_end = 0;    // exclusive
};

// Learning rate at token position `token_pos` in [0, total_tokens].
// Warmup ramps linearly from 0, stable stages hold peak_lr exactly,
// decay descends monotonically to final_lr. Pure; throws ValidationError
// when token_pos is out of range.
double lr_at(const SchedulePlan& plan, std::int64_t token_pos);

// Stage descriptor under half-open interval semantics: a boundary token
// belongs to the later stage. token_pos == total_tokens maps to decay.
StageInfo stage_at(const SchedulePlan& plan, std::int64_t token_pos);

// Baseline comparator: no stable plateau, cosine decay from warmup end
// to total_tokens.
SchedulePlan cosine_plan(double peak_lr, double final_lr, std::int64_t warmup_tokens,
                         std::int64_t total_tokens);

// The four-phase plan used throughout the test suite: 0.1T linear warmup
// to 4.5e-4, 12.4T + 6.5T constant stages, 4T cosine decay to 1.5e-6.
SchedulePlan reference_fg_wsd_plan();

}  // namespace lmlab::schedule
