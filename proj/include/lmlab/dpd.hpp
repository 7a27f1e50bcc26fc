#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace lmlab::dpd {

struct TokenRow {
    std::int32_t token_id = 0;
    std::vector<double> student_logits;
    std::vector<double> teacher_logits;
};

// One chosen/rejected response pair with per-token logit rows and the
// frozen reference policy's sequence log-probabilities.
struct PreferenceBatch {
    std::string pair_id;
    std::vector<TokenRow> chosen;
    std::vector<TokenRow> rejected;
    double ref_chosen_logprob = 0.0;
    double ref_rejected_logprob = 0.0;

    void validate() const;

    static PreferenceBatch from_json(const nlohmann::json& j);
};

enum class KdDirection { kForward, kReverse };

struct DpdWeights {
    double lambda_pos = 1.0;
    double lambda_neg = 0.5;
    double lambda_dpo = 1.0;
    double beta_dpo = 0.1;
    double gamma = 0.0;   // margin inside the sigmoid
    double tau = 1.0;     // distillation temperature
    KdDirection kd_direction = KdDirection::kForward;

    void validate() const;
};

struct TokenLoss {
    double loss = 0.0;
    std::vector<double> grad;  // d loss / d student logits
};

struct SequenceLoss {
    double loss = 0.0;                       // token mean
    std::vector<std::vector<double>> grads;  // aligned with input rows
};

struct DpoLoss {
    double loss = 0.0;
    double grad_chosen_logprob = 0.0;
    double grad_rejected_logprob = 0.0;
    double chosen_logprob = 0.0;    // policy sequence log-prob of chosen
    double rejected_logprob = 0.0;  // and of rejected
};

struct DpdResult {
    double total = 0.0;
    double kd_chosen = 0.0;
    double kd_rejected = 0.0;
    double dpo = 0.0;
    std::vector<std::vector<double>> grad_chosen;
    std::vector<std::vector<double>> grad_rejected;
};

// KL(softmax(teacher/tau) || softmax(student/tau)) with the analytic
// gradient (softmax(student/tau) - softmax(teacher/tau)) / tau. Reverse
// direction swaps the roles of the two distributions.
TokenLoss kd_token_loss(const TokenRow& row, double tau,
                        KdDirection direction = KdDirection::kForward);

// Arithmetic mean of per-token losses; gradient rows are the gradients of
// the mean, aligned with input rows.
SequenceLoss kd_sequence_loss(const std::vector<TokenRow>& rows, double tau,
                              KdDirection direction = KdDirection::kForward);

// Policy sequence log-prob under the student: sum_t log softmax(row_t)[token_id_t].
double sequence_logprob(const std::vector<TokenRow>& rows);

// -log sigmoid(beta * ((pi_c - ref_c) - (pi_r - ref_r)) - gamma) with
// gradients w.r.t. the two policy sequence log-probs.
DpoLoss dpo_loss(const PreferenceBatch& batch, double beta_dpo, double gamma);

// Joint objective: lambda_pos * KD(chosen) + lambda_neg * KD(rejected)
// + lambda_dpo * DPO, with per-token gradients w.r.t. student logits.
DpdResult dpd_total(const PreferenceBatch& batch, const DpdWeights& weights);

}  // namespace lmlab::dpd
