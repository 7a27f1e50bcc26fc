#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

namespace lmlab::rlcore {

struct Rollout {
    std::vector<std::int32_t> tokens;
    std::vector<double> logprobs;  // per-token, <= 0
    double reward = 0.0;
    bool truncated = false;

    void validate() const;
};

struct RolloutGroup {
    std::string question_id;
    std::vector<Rollout> rollouts;

    void validate() const;
    static RolloutGroup from_json(const nlohmann::json& j);
};

struct FilterDecision {
    std::string question_id;
    std::int64_t passed = 0;  // pass rate is the exact rational passed/total
    std::int64_t total = 0;
    bool retained = false;

    nlohmann::json to_json() const;
};

// Group-relative advantages: (r_i - mean) / (population std + eps).
// A zero-variance group yields exact zeros.
std::vector<double> group_advantages(const RolloutGroup& group, double eps = 1e-8);

struct PolicyLoss {
    double loss = 0.0;
    std::vector<double> rollout_mask;  // 1 for contributing rollouts, 0 for truncated
};

// Token-mean advantage-weighted negative log-likelihood over non-truncated
// rollouts. No KL or reference-policy term appears anywhere in the
// computation. Throws NumericError when every rollout is truncated.
PolicyLoss policy_loss(const RolloutGroup& group, const std::vector<double>& advantages);

// On-policy retention gate: keep questions whose pass rate lies strictly
// inside (0.10, 0.90), decided with exact integer arithmetic.
FilterDecision pass_rate_filter(const std::string& question_id, const std::vector<bool>& outcomes);

// Verdict record produced by an external sandboxed test runner
// (request {"solution","tests"} in, verdict {"passed_all","detail"} out).
struct RunnerResult {
    bool passed_all = false;
    bool runner_error = false;  // timeout or crash
    std::string detail;
};

struct BinaryReward {
    double reward = 0.0;
    std::string diagnostic;  // "runner_error" when the runner failed
};

BinaryReward binary_test_reward(const RunnerResult& result);

// External test-runner contract with a deterministic mock for tests.
class TestRunner {
public:
    virtual ~TestRunner() = default;
    virtual RunnerResult run(const std::string& solution, const std::string& tests) = 0;
};

// Passes iff every newline-separated "expect:<substring>" line of the test
// spec occurs in the solution; a test spec line "!timeout" simulates a
// runner failure.
class MockTestRunner : public TestRunner {
public:
    RunnerResult run(const std::string& solution, const std::string& tests) override;
};

// Pairwise judge contract: (a, b) -> P(a preferred) in [0, 1].
class PairwiseJudge {
public:
    virtual ~PairwiseJudge() = default;
    virtual double prefer(const std::string& a, const std::string& b) = 0;
};

// Antisymmetric deterministic mock: logistic in the length difference,
// so judge(a,b) + judge(b,a) = 1 and longer responses are preferred.
class LengthPreferenceJudge : public PairwiseJudge {
public:
    explicit LengthPreferenceJudge(double scale = 10.0) : scale_(scale) {}
    double prefer(const std::string& a, const std::string& b) override;

private:
    double scale_;
};

// Reward for one policy rollout paired with its reference response.
// Judge failures propagate; they are never silently mapped to 0.
double pairwise_reward(const std::string& policy_response, const std::string& reference_response,
                       PairwiseJudge& judge);

}  // namespace lmlab::rlcore
