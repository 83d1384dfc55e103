#include "editseq/gradcheck.hpp"

#include <memory>

#include "editseq/corpus.hpp"
#include "editseq/decode.hpp"
#include "editseq/objectives.hpp"

namespace editseq {

namespace {

constexpr double kLossScale = 1e-4;

// Shared context kept alive by the case closures.
struct CheckContext {
    Rng rng;
    ModelConfig cfg;
    std::unique_ptr<EditNet> editnet;
    std::unique_ptr<Dcnet> dcnet;
    VisualFeatures vis;
    std::vector<int64_t> existing{4, 5, 6, 7, 8};
    std::vector<int64_t> targets{4, 6, 5, 2};
    std::vector<ScmaMasks> frozen_masks;

    LstmWeights cell;
    CopyLstmWeights copy_cell;
    AdditiveAttentionWeights attn;
    AdditiveAttentionWeights vis_attn;
    ContextGateWeights gate;
    Tensor cell_x, cell_h, cell_c, cell_copied;
    Tensor query;
    std::vector<Tensor> keys;
    std::vector<Tensor> memories;
    Tensor probe_hidden, probe_vocab;
    Tensor word;

    explicit CheckContext(uint64_t seed) : rng(seed) {
        cfg.vocab_size = 12;
        cfg.embed_dim = 6;
        cfg.hidden_dim = 8;
        cfg.attn_dim = 5;
        cfg.k = 3;
        cfg.d_v = 7;
        editnet = std::make_unique<EditNet>(cfg, rng);
        dcnet = std::make_unique<Dcnet>(cfg, rng);
        std::vector<Tensor> feature_vectors;
        for (int64_t i = 0; i < cfg.k; ++i) {
            feature_vectors.push_back(Tensor::uniform({cfg.d_v}, 1.0, rng, false));
        }
        vis = VisualFeatures::from_vectors(std::move(feature_vectors));

        cell = LstmWeights::init(4, 3, rng);
        copy_cell = CopyLstmWeights::init(4, 3, rng);
        attn = AdditiveAttentionWeights::init(4, 4, 4, rng);
        vis_attn = AdditiveAttentionWeights::init(4, 5, 4, rng);
        gate = ContextGateWeights::init(4, 3, rng);
        cell_x = Tensor::vector({0.9, -0.6, 0.4});
        cell_h = Tensor::vector({0.8, -0.9, 0.6, -0.5});
        cell_c = Tensor::vector({1.2, -0.9, 1.4, 0.8});
        cell_copied = Tensor::vector({1.1, -0.8, 0.7, -1.2}, true);
        query = Tensor::uniform({4}, 0.8, rng);
        for (int i = 0; i < 3; ++i) keys.push_back(Tensor::uniform({4}, 0.8, rng));
        for (int i = 0; i < 3; ++i) memories.push_back(Tensor::uniform({4}, 0.9, rng));
        probe_hidden = Tensor::uniform({4}, 1.0, rng, false);
        probe_vocab = Tensor::uniform({5}, 1.0, rng, false);
        word = Tensor::uniform({3}, 0.8, rng);

        // Freeze the per-step selection masks of the editor loss at their
        // baseline values.
        EncodedCaption enc = editnet->encode_caption(existing);
        auto baseline = editnet->teacher_forced(enc, &vis, targets);
        for (const auto& trace : baseline.traces) {
            ScmaMasks m;
            m.index = trace.attention_argmax;
            m.alpha_max = trace.alpha_max;
            m.m_binary.assign(existing.size(), 0.0);
            m.m_shift.assign(existing.size(), 0.0);
            m.m_binary[static_cast<size_t>(m.index)] = 1.0;
            m.m_shift[static_cast<size_t>(m.index)] = 1.0 - m.alpha_max;
            frozen_masks.push_back(m);
        }
    }
};

std::vector<Tensor> lstm_params(const LstmWeights& w) {
    return {w.w_forget, w.w_input, w.w_cell, w.w_output,
            w.b_forget, w.b_input, w.b_cell, w.b_output};
}

}  // namespace

GradCheckReport run_gradcheck(std::span<const GradCheckCase> cases, double eps) {
    GradCheckReport report;
    for (const GradCheckCase& check : cases) {
        std::vector<Tensor> params = check.params;
        FdReport fd = finite_diff_check(check.fn, params, eps);
        report.max_error = std::max(report.max_error, fd.max_rel_error);
        report.total_skipped += fd.skipped;
        report.items.push_back({check.name, fd});
    }
    return report;
}

std::vector<GradCheckCase> standard_gradcheck_cases(uint64_t seed) {
    auto ctx = std::make_shared<CheckContext>(seed);
    std::vector<GradCheckCase> cases;

    {
        std::vector<Tensor> params = lstm_params(ctx->cell);
        cases.push_back({"lstm_cell",
                         [ctx]() {
                             LstmState prev{ctx->cell_h, ctx->cell_c};
                             LstmState s = lstm_step(ctx->cell_x, prev, ctx->cell);
                             Tensor loss = add(sum(mul(s.h, ctx->probe_hidden)), sum(mul(s.c, s.c)));
                             return FdProbe{mul(loss, kLossScale), {}};
                         },
                         params});
    }
    {
        std::vector<Tensor> params = lstm_params(ctx->copy_cell.base);
        params.push_back(ctx->copy_cell.w_copy);
        params.push_back(ctx->cell_copied);
        cases.push_back({"copy_lstm_cell",
                         [ctx]() {
                             LstmState prev{ctx->cell_h, ctx->cell_c};
                             LstmState s = copy_lstm_step(ctx->cell_x, prev, ctx->cell_copied,
                                                          ctx->copy_cell);
                             Tensor loss = add(sum(mul(s.h, ctx->probe_hidden)), sum(mul(s.c, s.c)));
                             return FdProbe{mul(loss, kLossScale), {}};
                         },
                         params});
    }
    {
        std::vector<Tensor> params{ctx->attn.w_key, ctx->attn.w_query, ctx->attn.w_score,
                                   ctx->query, ctx->keys[0], ctx->keys[1], ctx->keys[2]};
        cases.push_back({"additive_attention",
                         [ctx]() {
                             Tensor alpha = additive_attention(ctx->query, ctx->keys, ctx->attn);
                             Tensor probe = slice(ctx->probe_hidden, 0, 3);
                             return FdProbe{mul(sum(mul(alpha, probe)), kLossScale), {}};
                         },
                         params});
    }
    {
        // Hard selection through the frozen-mask surrogate; the signature
        // skips coordinates whose perturbation flips the argmax.
        auto masks = std::make_shared<ScmaMasks>(
            make_scma_masks(additive_attention(ctx->query, ctx->keys, ctx->attn).values()));
        std::vector<Tensor> params{ctx->attn.w_key, ctx->attn.w_query, ctx->attn.w_score,
                                   ctx->query, ctx->memories[0], ctx->memories[1], ctx->memories[2]};
        cases.push_back({"scma_select",
                         [ctx, masks]() {
                             Tensor alpha = additive_attention(ctx->query, ctx->keys, ctx->attn);
                             int64_t index = -1;
                             Tensor copied = scma_select(alpha, ctx->memories, &index, masks.get());
                             return FdProbe{mul(sum(mul(copied, ctx->probe_hidden)), kLossScale),
                                            {index}};
                         },
                         params});
    }
    {
        std::vector<Tensor> params{ctx->gate.w_source, ctx->gate.w_target, ctx->gate.w_gate,
                                   ctx->word};
        cases.push_back({"context_gate",
                         [ctx]() {
                             Tensor out = context_gate(ctx->word, ctx->cell_h, ctx->cell_c, ctx->gate);
                             return FdProbe{mul(sum(mul(out, ctx->probe_hidden)), kLossScale), {}};
                         },
                         params});
    }
    {
        std::vector<Tensor> params{ctx->vis_attn.w_key, ctx->vis_attn.w_query, ctx->vis_attn.w_score,
                                   ctx->query};
        cases.push_back({"visual_attention",
                         [ctx]() {
                             std::vector<Tensor> feats{Tensor::vector({0.4, -0.7, 0.9, 0.2, -0.5}),
                                                       Tensor::vector({-0.3, 0.8, 0.1, -0.9, 0.6})};
                             Tensor out = visual_attend(ctx->query, feats, ctx->vis_attn);
                             return FdProbe{mul(sum(mul(out, feats[0])), kLossScale), {}};
                         },
                         params});
    }
    {
        std::vector<Tensor> params;
        for (const auto& nt : ctx->editnet->parameters()) params.push_back(nt.tensor);
        cases.push_back({"editnet_loss",
                         [ctx]() {
                             EncodedCaption enc = ctx->editnet->encode_caption(ctx->existing);
                             EditNetState state = EditNetState::zero(ctx->cfg.hidden_dim);
                             std::vector<Tensor> dists;
                             std::vector<int64_t> signature;
                             int64_t input = Vocab::kStart;
                             for (size_t t = 0; t < ctx->targets.size(); ++t) {
                                 if (t > 0) input = ctx->targets[t - 1];
                                 EditNet::StepHooks hooks;
                                 hooks.frozen_masks = &ctx->frozen_masks[t];
                                 auto step = ctx->editnet->step(state, input, &ctx->vis, enc, &hooks);
                                 signature.push_back(step.trace.attention_argmax);
                                 dists.push_back(softmax(step.logits));
                                 state = step.state;
                             }
                             Tensor xe = xe_loss(dists, ctx->targets);
                             Tensor mse = hidden_mse_loss(state.language.h,
                                                          Tensor::full({ctx->cfg.hidden_dim}, 0.3),
                                                          ctx->editnet->w_mse, ctx->editnet->b_mse);
                             return FdProbe{mul(combined_loss(xe, mse), kLossScale), signature};
                         },
                         params});
    }
    {
        std::vector<Tensor> params;
        for (const auto& nt : ctx->dcnet->parameters()) params.push_back(nt.tensor);
        cases.push_back({"dcnet_loss",
                         [ctx]() {
                             auto enc = ctx->dcnet->encode(ctx->existing);
                             auto result = ctx->dcnet->teacher_forced(enc, ctx->targets);
                             Tensor xe = xe_loss(result.step_distributions, ctx->targets);
                             Tensor mse = hidden_mse_loss(result.final_language_hidden,
                                                          Tensor::full({ctx->cfg.hidden_dim}, 0.3),
                                                          ctx->dcnet->w_mse, ctx->dcnet->b_mse);
                             return FdProbe{mul(combined_loss(xe, mse), kLossScale), {}};
                         },
                         params});
    }
    return cases;
}

}  // namespace editseq
