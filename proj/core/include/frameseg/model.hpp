#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "frameseg/data.hpp"
#include "frameseg/losses.hpp"
#include "frameseg/vocab.hpp"

namespace frameseg {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct ToyModelConfig {
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 4;
    int mlp_ratio = 4;
    int frame_feature_dim = 16;
    int frames = 25;
    int max_seq_len = 512;
    Vocab vocab;

    void validate() const;
};

inline constexpr int kFrameSlot = -1;

/// Prompt tokens with frame-feature slots spliced in, optionally followed by
/// teacher-forced answer tokens.
struct InterleavedInput {
    std::vector<int> slots;   // vocabulary id, or kFrameSlot
    Matrix frame_features;    // row k feeds the k-th frame slot
    std::size_t prompt_length = 0;
    int frames = 0;

    /// The frames + 1 positions whose logits predict the mask tokens and the end token.
    [[nodiscard]] std::vector<std::size_t> answer_positions() const;
    [[nodiscard]] std::size_t length() const noexcept { return slots.size(); }
};

/// Tokenized prompt for `sample` over `features`, ready for decoding.
InterleavedInput make_prompt_input(const Vocab& vocab, std::string_view query, const Features& features, int frames,
                                   bool with_system_prompt);

/// Prompt plus teacher-forced mask tokens; targets are the mask tokens and the end token.
struct TrainExample {
    InterleavedInput input;
    std::vector<int> targets;
    Bits labels;
};

TrainExample make_train_example(const Vocab& vocab, const VideoSample& sample, const Features& features, int frames,
                                bool with_system_prompt);

/// Every prompt text (and the system prompt when enabled) that a vocabulary for `samples` must cover.
std::vector<std::string> vocabulary_texts(const std::vector<VideoSample>& samples, int frames,
                                          bool with_system_prompt);

struct LayerWeights {
    Matrix ln1_g, ln1_b;
    Matrix w_qkv, b_qkv;
    Matrix w_o, b_o;
    Matrix ln2_g, ln2_b;
    Matrix w_fc, b_fc;
    Matrix w_proj, b_proj;
};

/// All trainable tensors. Vectors are stored as 1 x n matrices.
struct Weights {
    Matrix tok_emb;
    Matrix frame_w, frame_b;
    Matrix pos_emb;
    std::vector<LayerWeights> layers;
    Matrix lnf_g, lnf_b;
    Matrix head_w, head_b;

    template <class F>
    void visit(F&& fn) {
        visit_impl(*this, fn);
    }
    template <class F>
    void visit(F&& fn) const {
        visit_impl(*this, fn);
    }

    /// Same shapes, all zeros.
    [[nodiscard]] Weights zeros_like() const;
    [[nodiscard]] std::size_t parameter_count() const;
    void set_zero();

private:
    template <class W, class F>
    static void visit_impl(W& w, F& fn) {
        fn(std::string("tok_emb"), w.tok_emb);
        fn(std::string("frame_w"), w.frame_w);
        fn(std::string("frame_b"), w.frame_b);
        fn(std::string("pos_emb"), w.pos_emb);
        for (std::size_t l = 0; l < w.layers.size(); ++l) {
            auto& L = w.layers[l];
            const std::string p = "layers." + std::to_string(l) + ".";
            fn(p + "ln1_g", L.ln1_g);
            fn(p + "ln1_b", L.ln1_b);
            fn(p + "w_qkv", L.w_qkv);
            fn(p + "b_qkv", L.b_qkv);
            fn(p + "w_o", L.w_o);
            fn(p + "b_o", L.b_o);
            fn(p + "ln2_g", L.ln2_g);
            fn(p + "ln2_b", L.ln2_b);
            fn(p + "w_fc", L.w_fc);
            fn(p + "b_fc", L.b_fc);
            fn(p + "w_proj", L.w_proj);
            fn(p + "b_proj", L.b_proj);
        }
        fn(std::string("lnf_g"), w.lnf_g);
        fn(std::string("lnf_b"), w.lnf_b);
        fn(std::string("head_w"), w.head_w);
        fn(std::string("head_b"), w.head_b);
    }
};

/// Activations kept by a forward pass for the backward pass.
struct Tape;

/// Per-sequence key/value cache for incremental decoding.
struct DecoderState {
    std::vector<Matrix> keys;    // per layer, positions x d_model
    std::vector<Matrix> values;  // per layer, positions x d_model
    std::size_t length = 0;
};

/// Small pre-norm causal transformer over interleaved token and frame slots.
/// Each frame occupies one slot, embedded by a learned linear projection of
/// its feature vector.
class ToyDecoder {
public:
    explicit ToyDecoder(ToyModelConfig config);

    /// Gaussian initialization (std 0.02, residual projections scaled by
    /// 1/sqrt(2 n_layers)); layer-norm gains 1, biases 0. With `zero_head` the
    /// output projection starts at zero, giving uniform next-token distributions.
    void init(std::uint64_t seed, bool zero_head = false);

    [[nodiscard]] const ToyModelConfig& config() const noexcept { return config_; }
    [[nodiscard]] Weights& weights() noexcept { return weights_; }
    [[nodiscard]] const Weights& weights() const noexcept { return weights_; }

    /// Logits for every position (length x vocab).
    [[nodiscard]] Matrix forward_logits(const InterleavedInput& input) const;

    /// Logits for the selected positions only; fills `tape` when given.
    [[nodiscard]] Matrix forward(const InterleavedInput& input, std::span<const std::size_t> rows, Tape* tape) const;

    /// Accumulates d(loss)/d(weights) into `grads` given d(loss)/d(logits) of the rows the tape was recorded for.
    void backward(const Tape& tape, const Matrix& dlogits, Weights& grads) const;

    /// Runs the prompt and returns the cache plus the logits of its last position.
    [[nodiscard]] std::pair<DecoderState, Eigen::RowVectorXd> prefill(const InterleavedInput& prompt) const;

    /// Appends one token and returns the logits at its position.
    [[nodiscard]] Eigen::RowVectorXd step(DecoderState& state, int token) const;

private:
    [[nodiscard]] Eigen::RowVectorXd embed_token(int token, std::size_t position) const;
    void check_input(const InterleavedInput& input) const;

    ToyModelConfig config_;
    Weights weights_;
};

struct Tape {
    struct Layer {
        Matrix x_in, xhat1, a1, qkv, ctx, x1, xhat2, a2, hpre, hact;
        Eigen::VectorXd rstd1, rstd2;
        std::vector<Matrix> probs;  // per head, length x length
    };
    const InterleavedInput* input = nullptr;
    std::vector<Layer> layers;
    Matrix x_final, xhat_f, out_f;
    Eigen::VectorXd rstd_f;
    std::vector<std::size_t> rows;
};

/// Foreground probability per answer frame from the two-way softmax over the
/// logits of '0' and '1'. `logits` is positions x vocab; `answer_positions`
/// selects the frames + 1 answer rows (the end-token row is ignored).
std::vector<double> extract_frame_probs(const Matrix& logits, std::span<const std::size_t> answer_positions, int id0,
                                        int id1);

struct BatchForward {
    std::vector<Matrix> logits;  // per sample, length x vocab
    double lm_loss = 0.0;        // mean over all supervised answer positions
};

/// Full-sequence logits for each example and the language-model loss on the answer positions.
BatchForward forward_batch(const ToyDecoder& model, std::span<const TrainExample> batch);

struct DecodeResult {
    std::string text;               // generated characters, end token excluded
    std::vector<int> tokens;        // generated ids, end token included when emitted
    std::vector<double> probs;      // per-frame foreground probability along the chosen beam
    double score = 0.0;             // summed log-probability of `tokens`
};

/// Beam search over the answer. Constrained decoding only allows '0'/'1' for
/// the first `frames` steps and the end token afterwards; unconstrained
/// decoding ranks the whole vocabulary and stops at the end token or after
/// frames + 1 steps.
DecodeResult beam_decode(const ToyDecoder& model, const InterleavedInput& prompt, int n_beams, bool constrained);

/// Summed log-probability of `tokens` as a continuation of `prompt`.
double sequence_logprob(const ToyDecoder& model, const InterleavedInput& prompt, std::span<const int> tokens);

}  // namespace frameseg
