#include "lmlab/schedule.hpp"

#include <cmath>
#include <set>

#include "lmlab/errors.hpp"

namespace lmlab::schedule {

namespace {

std::string shape_name(DecayShape s) {
    return s == DecayShape::kCosine ? "cosine" : "linear";
}

DecayShape decay_shape_from(const std::string& s) {
    if (s == "cosine") return DecayShape::kCosine;
    if (s == "linear") return DecayShape::kLinear;
    throw ValidationError("unknown decay_shape: " + s);
}

}  // namespace

std::int64_t SchedulePlan::stable_tokens() const {
    std::int64_t total = 0;
    for (const auto& s : stable_stages) total += s.tokens;
    return total;
}

std::int64_t SchedulePlan::total_tokens() const {
    return warmup_tokens + stable_tokens() + decay_tokens;
}

void SchedulePlan::validate() const {
    if (!(peak_lr > 0.0)) throw ValidationError("peak_lr must be positive");
    if (!(final_lr > 0.0)) throw ValidationError("final_lr must be positive");
    if (final_lr > peak_lr) throw ValidationError("final_lr must not exceed peak_lr");
    if (warmup_tokens < 0) throw ValidationError("warmup_tokens must be nonnegative");
    if (decay_tokens <= 0) throw ValidationError("decay_tokens must be positive");
    std::set<std::string> names;
    for (const auto& s : stable_stages) {
        if (s.tokens <= 0) throw ValidationError("stable stage '" + s.name + "' has nonpositive tokens");
        if (!names.insert(s.name).second) {
            throw ValidationError("duplicate stable stage name: " + s.name);
        }
    }
}

double lr_at(const SchedulePlan& plan, std::int64_t token_pos) {
    const std::int64_t total = plan.total_tokens();
    if (token_pos < 0 || token_pos > total) {
        throw ValidationError("token_pos " + std::to_string(token_pos) +
                              " outside schedule range [0, " + std::to_string(total) + "]");
    }
    if (token_pos < plan.warmup_tokens) {
        return plan.peak_lr * (static_cast<double>(token_pos) / static_cast<double>(plan.warmup_tokens));
    }
    const std::int64_t decay_start = plan.warmup_tokens + plan.stable_tokens();
    if (token_pos < decay_start) {
        return plan.peak_lr;
    }
    const double u = static_cast<double>(token_pos - decay_start) / static_cast<double>(plan.decay_tokens);
    if (plan.decay_shape == DecayShape::kCosine) {
        return plan.final_lr + (plan.peak_lr - plan.final_lr) * 0.5 * (1.0 + std::cos(M_PI * u));
    }
    return plan.peak_lr + (plan.final_lr - plan.peak_lr) * u;
}

StageInfo stage_at(const SchedulePlan& plan, std::int64_t token_pos) {
    const std::int64_t total = plan.total_tokens();
    if (token_pos < 0 || token_pos > total) {
        throw ValidationError("token_pos " + std::to_string(token_pos) +
                              " outside schedule range [0, " + std::to_string(total) + "]");
    }
    if (token_pos < plan.warmup_tokens) {
        return {StageKind::kWarmup, "", 0, plan.warmup_tokens};
    }
    std::int64_t start = plan.warmup_tokens;
    for (const auto& s : plan.stable_stages) {
        const std::int64_t end = start + s.tokens;
        if (token_pos < end) return {StageKind::kStable, s.name, start, end};
        start = end;
    }
    return {StageKind::kDecay, "", start, total};
}

SchedulePlan cosine_plan(double peak_lr, double final_lr, std::int64_t warmup_tokens,
                         std::int64_t total_tokens) {
    if (total_tokens <= warmup_tokens) {
        throw ValidationError("total_tokens must exceed warmup_tokens");
    }
    SchedulePlan plan;
    plan.peak_lr = peak_lr;
    plan.final_lr = final_lr;
    plan.warmup_tokens = warmup_tokens;
    plan.decay_tokens = total_tokens - warmup_tokens;
    plan.decay_shape = DecayShape::kCosine;
    plan.validate();
    return plan;
}

SchedulePlan reference_fg_wsd_plan() {
    SchedulePlan plan;
    plan.peak_lr = 4.5e-4;
    plan.final_lr = 1.5e-6;
    plan.warmup_tokens = 100'000'000'000;  // 0.1T
    plan.stable_stages = {
        {"diversity-enriched", 12'400'000'000'000},  // 12.4T
        {"high-quality", 6'500'000'000'000},         // 6.5T
    };
    plan.decay_tokens = 4'000'000'000'000;  // 4T
    return plan;
}

nlohmann::json SchedulePlan::to_json() const {
    nlohmann::json stages = nlohmann::json::array();
    for (const auto& s : stable_stages) {
        stages.push_back({{"name", s.name}, {"tokens", s.tokens}});
    }
    return {
        {"peak_lr", peak_lr},
        {"final_lr", final_lr},
        {"warmup_tokens", warmup_tokens},
        {"stable_stages", stages},
        {"decay_tokens", decay_tokens},
        {"decay_shape", shape_name(decay_shape)},
        {"warmup_shape", "linear"},
    };
}

SchedulePlan SchedulePlan::from_json(const nlohmann::json& j) {
    SchedulePlan plan;
    try {
        plan.peak_lr = j.at("peak_lr").get<double>();
        plan.final_lr = j.at("final_lr").get<double>();
        if (!j.at("warmup_tokens").is_number_integer()) {
            throw ValidationError("warmup_tokens must be an exact integer");
        }
        plan.warmup_tokens = j.at("warmup_tokens").get<std::int64_t>();
        for (const auto& s : j.at("stable_stages")) {
            if (!s.at("tokens").is_number_integer()) {
                throw ValidationError("stage tokens must be exact integers");
            }
            plan.stable_stages.push_back({s.at("name").get<std::string>(), s.at("tokens").get<std::int64_t>()});
        }
        if (!j.at("decay_tokens").is_number_integer()) {
            throw ValidationError("decay_tokens must be an exact integer");
        }
        plan.decay_tokens = j.at("decay_tokens").get<std::int64_t>();
        plan.decay_shape = decay_shape_from(j.value("decay_shape", "cosine"));
        const std::string warmup = j.value("warmup_shape", "linear");
        if (warmup != "linear") throw ValidationError("unknown warmup_shape: " + warmup);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed schedule plan: ") + e.what());
    }
    plan.validate();
    return plan;
}

}  // namespace lmlab::schedule
