#include "lmlab/dpd.hpp"

#include <algorithm>
#include <cmath>

#include "lmlab/errors.hpp"

namespace lmlab::dpd {

namespace {

void check_finite(const std::vector<double>& v, const char* what) {
    for (const double x : v) {
        if (!std::isfinite(x)) throw NumericError(std::string("non-finite value in ") + what);
    }
}

// softmax(logits / tau) with max-subtraction; also returns log-probs.
void softmax_scaled(const std::vector<double>& logits, double tau, std::vector<double>& probs,
                    std::vector<double>& logprobs) {
    const std::size_t n = logits.size();
    probs.resize(n);
    logprobs.resize(n);
    double max_scaled = -HUGE_VAL;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = logits[i] / tau;
        logprobs[i] = s;
        max_scaled = std::max(max_scaled, s);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += std::exp(logprobs[i] - max_scaled);
    const double lse = max_scaled + std::log(sum);
    for (std::size_t i = 0; i < n; ++i) {
        logprobs[i] -= lse;
        probs[i] = std::exp(logprobs[i]);
    }
}

double log_sigmoid(double x) {
    // -softplus(-x), stable on both tails
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

}  // namespace

void PreferenceBatch::validate() const {
    if (chosen.empty() || rejected.empty()) {
        throw ValidationError("preference batch '" + pair_id + "' has an empty sequence");
    }
    if (ref_chosen_logprob > 0.0 || ref_rejected_logprob > 0.0) {
        throw ValidationError("reference log-probs must be <= 0");
    }
    const std::size_t vocab = chosen.front().student_logits.size();
    auto check_rows = [&](const std::vector<TokenRow>& rows, const char* side) {
        for (const auto& row : rows) {
            if (row.student_logits.size() != vocab || row.teacher_logits.size() != vocab) {
                throw ValidationError(std::string("inconsistent vocabulary size in ") + side);
            }
            if (row.token_id < 0 || static_cast<std::size_t>(row.token_id) >= vocab) {
                throw ValidationError(std::string("token_id out of vocabulary range in ") + side);
            }
            check_finite(row.student_logits, "student logits");
            check_finite(row.teacher_logits, "teacher logits");
        }
    };
    check_rows(chosen, "chosen");
    check_rows(rejected, "rejected");
}

void DpdWeights::validate() const {
    if (lambda_pos < 0.0 || lambda_neg < 0.0 || lambda_dpo < 0.0) {
        throw ValidationError("loss weights must be nonnegative");
    }
    if (lambda_pos == 0.0 && lambda_neg == 0.0 && lambda_dpo == 0.0) {
        throw ValidationError("at least one loss weight must be positive");
    }
    if (!(beta_dpo > 0.0)) throw ValidationError("beta_dpo must be positive");
    if (gamma < 0.0) throw ValidationError("gamma must be nonnegative");
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
}

TokenLoss kd_token_loss(const TokenRow& row, double tau, KdDirection direction) {
    if (!(tau > 0.0)) throw ValidationError("tau must be positive");
    check_finite(row.student_logits, "student logits");
    check_finite(row.teacher_logits, "teacher logits");
    if (row.student_logits.size() != row.teacher_logits.size() || row.student_logits.empty()) {
        throw ValidationError("student/teacher logit vectors must have equal nonzero size");
    }

    const std::size_t n = row.student_logits.size();
    std::vector<double> q, logq, p, logp;
    softmax_scaled(row.student_logits, tau, q, logq);
    softmax_scaled(row.teacher_logits, tau, p, logp);

    TokenLoss out;
    out.grad.assign(n, 0.0);
    if (direction == KdDirection::kForward) {
        // KL(p || q), teacher as target
        for (std::size_t i = 0; i < n; ++i) {
            if (p[i] > 0.0) out.loss += p[i] * (logp[i] - logq[i]);
            out.grad[i] = (q[i] - p[i]) / tau;
        }
    } else {
        // KL(q || p): grad_i = q_i * (logq_i - logp_i - KL) / tau
        for (std::size_t i = 0; i < n; ++i) {
            if (q[i] > 0.0) out.loss += q[i] * (logq[i] - logp[i]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            out.grad[i] = q[i] * (logq[i] - logp[i] - out.loss) / tau;
        }
    }
    out.loss = std::max(out.loss, 0.0);
    return out;
}

SequenceLoss kd_sequence_loss(const std::vector<TokenRow>& rows, double tau, KdDirection direction) {
    if (rows.empty()) throw ValidationError("kd_sequence_loss over empty row list");
    SequenceLoss out;
    const double inv_t = 1.0 / static_cast<double>(rows.size());
    out.grads.reserve(rows.size());
    for (const auto& row : rows) {
        TokenLoss tl = kd_token_loss(row, tau, direction);
        out.loss += tl.loss * inv_t;
        for (double& g : tl.grad) g *= inv_t;
        out.grads.push_back(std::move(tl.grad));
    }
    return out;
}

double sequence_logprob(const std::vector<TokenRow>& rows) {
    double total = 0.0;
    std::vector<double> probs, logprobs;
    for (const auto& row : rows) {
        softmax_scaled(row.student_logits, 1.0, probs, logprobs);
        total += logprobs[static_cast<std::size_t>(row.token_id)];
    }
    return total;
}

DpoLoss dpo_loss(const PreferenceBatch& batch, double beta_dpo, double gamma) {
    batch.validate();
    DpoLoss out;
    out.chosen_logprob = sequence_logprob(batch.chosen);
    out.rejected_logprob = sequence_logprob(batch.rejected);
    const double gap = (out.chosen_logprob - batch.ref_chosen_logprob) -
                       (out.rejected_logprob - batch.ref_rejected_logprob);
    const double h = beta_dpo * gap - gamma;
    out.loss = -log_sigmoid(h);
    // d/dh[-log sigmoid(h)] = -sigmoid(-h)
    const double sig_minus_h =
        h >= 0.0 ? std::exp(-h) / (1.0 + std::exp(-h)) : 1.0 / (1.0 + std::exp(h));
    out.grad_chosen_logprob = -beta_dpo * sig_minus_h;
    out.grad_rejected_logprob = beta_dpo * sig_minus_h;
    return out;
}

DpdResult dpd_total(const PreferenceBatch& batch, const DpdWeights& weights) {
    weights.validate();
    batch.validate();

    DpdResult out;
    const SequenceLoss kd_c = kd_sequence_loss(batch.chosen, weights.tau, weights.kd_direction);
    const SequenceLoss kd_r = kd_sequence_loss(batch.rejected, weights.tau, weights.kd_direction);
    const DpoLoss dpo = dpo_loss(batch, weights.beta_dpo, weights.gamma);

    out.kd_chosen = kd_c.loss;
    out.kd_rejected = kd_r.loss;
    out.dpo = dpo.loss;
    out.total = weights.lambda_pos * kd_c.loss + weights.lambda_neg * kd_r.loss +
                weights.lambda_dpo * dpo.loss;

    // DPO reaches token logits through d pi / d z_t = onehot(y_t) - softmax(z_t).
    auto accumulate = [](const std::vector<TokenRow>& rows, const std::vector<std::vector<double>>& kd_grads,
                         double lambda_kd, double lambda_dpo, double dpo_grad_logprob,
                         std::vector<std::vector<double>>& out_grads) {
        std::vector<double> probs, logprobs;
        out_grads.reserve(rows.size());
        for (std::size_t t = 0; t < rows.size(); ++t) {
            const auto& row = rows[t];
            std::vector<double> g(row.student_logits.size(), 0.0);
            for (std::size_t i = 0; i < g.size(); ++i) g[i] = lambda_kd * kd_grads[t][i];
            if (lambda_dpo != 0.0) {
                softmax_scaled(row.student_logits, 1.0, probs, logprobs);
                const double coeff = lambda_dpo * dpo_grad_logprob;
                for (std::size_t i = 0; i < g.size(); ++i) g[i] -= coeff * probs[i];
                g[static_cast<std::size_t>(row.token_id)] += coeff;
            }
            out_grads.push_back(std::move(g));
        }
    };
    accumulate(batch.chosen, kd_c.grads, weights.lambda_pos, weights.lambda_dpo,
               dpo.grad_chosen_logprob, out.grad_chosen);
    accumulate(batch.rejected, kd_r.grads, weights.lambda_neg, weights.lambda_dpo,
               dpo.grad_rejected_logprob, out.grad_rejected);
    return out;
}

PreferenceBatch PreferenceBatch::from_json(const nlohmann::json& j) {
    PreferenceBatch batch;
    auto parse_side = [](const nlohmann::json& side) {
        std::vector<TokenRow> rows;
        const auto& tokens = side.at("tokens");
        const auto& student = side.at("student_logits");
        const auto& teacher = side.at("teacher_logits");
        if (tokens.size() != student.size() || tokens.size() != teacher.size()) {
            throw ValidationError("tokens/student_logits/teacher_logits lengths differ");
        }
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            TokenRow row;
            row.token_id = tokens[t].get<std::int32_t>();
            row.student_logits = student[t].get<std::vector<double>>();
            row.teacher_logits = teacher[t].get<std::vector<double>>();
            rows.push_back(std::move(row));
        }
        return rows;
    };
    try {
        batch.pair_id = j.at("pair_id").get<std::string>();
        batch.chosen = parse_side(j.at("chosen"));
        batch.rejected = parse_side(j.at("rejected"));
        batch.ref_chosen_logprob = j.at("ref_chosen_logprob").get<double>();
        batch.ref_rejected_logprob = j.at("ref_rejected_logprob").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed preference batch: ") + e.what());
    }
    batch.validate();
    return batch;
}

}  // namespace lmlab::dpd
