#include "frameseg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "frameseg/error.hpp"

namespace frameseg {

namespace {

constexpr double kLayerNormEps = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

struct LayerNormOut {
    Matrix y;
    Matrix xhat;
    Eigen::VectorXd rstd;
};

LayerNormOut layer_norm(const Matrix& x, const Matrix& g, const Matrix& b) {
    LayerNormOut out;
    const auto n = x.rows();
    const auto d = static_cast<double>(x.cols());
    out.xhat.resize(n, x.cols());
    out.rstd.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double mean = x.row(r).sum() / d;
        const auto centered = x.row(r).array() - mean;
        const double var = centered.square().sum() / d;
        const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
        out.rstd(r) = rstd;
        out.xhat.row(r) = centered * rstd;
    }
    out.y = (out.xhat.array().rowwise() * g.row(0).array()).rowwise() + b.row(0).array();
    return out;
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& xhat, const Eigen::VectorXd& rstd, const Matrix& g,
                           Matrix& dg, Matrix& db) {
    dg.row(0) += (dy.array() * xhat.array()).colwise().sum().matrix();
    db.row(0) += dy.colwise().sum();
    const Matrix dxhat = dy.array().rowwise() * g.row(0).array();
    const auto d = static_cast<double>(dy.cols());
    Matrix dx(dy.rows(), dy.cols());
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
        const double mean_dxhat = dxhat.row(r).sum() / d;
        const double mean_dxhat_xhat = dxhat.row(r).dot(xhat.row(r)) / d;
        dx.row(r) = rstd(r) * (dxhat.row(r).array() - mean_dxhat - xhat.row(r).array() * mean_dxhat_xhat);
    }
    return dx;
}

Matrix gelu(const Matrix& x) {
    return x.unaryExpr([](double v) { return 0.5 * v * (1.0 + std::tanh(kGeluC * (v + kGeluA * v * v * v))); });
}

Matrix gelu_grad(const Matrix& x) {
    return x.unaryExpr([](double v) {
        const double t = std::tanh(kGeluC * (v + kGeluA * v * v * v));
        return 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * v * v);
    });
}

Matrix add_bias(Matrix m, const Matrix& bias) {
    m.rowwise() += bias.row(0);
    return m;
}

void fill_normal(Matrix& m, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = dist(rng);
    }
}

Eigen::RowVectorXd log_softmax(const Eigen::RowVectorXd& logits) {
    const double mx = logits.maxCoeff();
    const double lse = mx + std::log((logits.array() - mx).exp().sum());
    return logits.array() - lse;
}

}  // namespace

// ---------------------------------------------------------------------------

void ToyModelConfig::validate() const {
    if (d_model <= 0 || n_layers <= 0 || n_heads <= 0 || mlp_ratio <= 0) {
        throw InvalidInput("model dims must be positive");
    }
    if (d_model % n_heads != 0) {
        throw InvalidInput("d_model " + std::to_string(d_model) + " not divisible by n_heads " +
                           std::to_string(n_heads));
    }
    if (frame_feature_dim <= 0 || frames <= 0 || max_seq_len <= frames + 1) {
        throw InvalidInput("invalid frame_feature_dim, frames or max_seq_len");
    }
    if (vocab.zero_id() == vocab.one_id()) {
        throw InvalidInput("'0' and '1' must be distinct tokens");
    }
}

std::vector<std::size_t> InterleavedInput::answer_positions() const {
    std::vector<std::size_t> out;
    if (prompt_length == 0) {
        throw InvalidInput("answer_positions: empty prompt");
    }
    out.reserve(static_cast<std::size_t>(frames) + 1);
    for (int k = 0; k <= frames; ++k) {
        out.push_back(prompt_length - 1 + static_cast<std::size_t>(k));
    }
    return out;
}

InterleavedInput make_prompt_input(const Vocab& vocab, std::string_view query, const Features& features, int frames,
                                   bool with_system_prompt) {
    InterleavedInput in;
    in.frames = frames;
    std::vector<std::string> tokens;
    if (with_system_prompt) {
        tokens = tokenize(kSystemPrompt);
    }
    for (auto& t : tokenize(build_prompt(query, frames))) {
        tokens.push_back(std::move(t));
    }
    const Features fitted = fit_frames(features, static_cast<std::size_t>(frames));
    in.frame_features = Eigen::Map<const Matrix>(fitted.values.data(), static_cast<Eigen::Index>(fitted.rows),
                                                 static_cast<Eigen::Index>(fitted.cols));
    int seen = 0;
    for (const auto& t : tokens) {
        if (t == Vocab::kImage) {
            in.slots.push_back(kFrameSlot);
            ++seen;
        } else {
            in.slots.push_back(vocab.id(t));
        }
    }
    if (seen != frames) {
        throw InvalidInput("prompt holds " + std::to_string(seen) + " frame slots, expected " + std::to_string(frames));
    }
    in.prompt_length = in.slots.size();
    return in;
}

TrainExample make_train_example(const Vocab& vocab, const VideoSample& sample, const Features& features, int frames,
                                bool with_system_prompt) {
    TrainExample ex;
    ex.input = make_prompt_input(vocab, sample.query, features, frames, with_system_prompt);
    ex.labels = sample_labels(sample, frames);
    for (const auto b : ex.labels) {
        const int id = b != 0 ? vocab.one_id() : vocab.zero_id();
        ex.input.slots.push_back(id);
        ex.targets.push_back(id);
    }
    ex.targets.push_back(vocab.eos_id());
    return ex;
}

std::vector<std::string> vocabulary_texts(const std::vector<VideoSample>& samples, int frames,
                                          bool with_system_prompt) {
    std::vector<std::string> texts;
    texts.reserve(samples.size() + 1);
    if (with_system_prompt) {
        texts.emplace_back(kSystemPrompt);
    }
    for (const auto& s : samples) {
        texts.push_back(build_prompt(s.query, frames));
    }
    return texts;
}

// ---------------------------------------------------------------------------

Weights Weights::zeros_like() const {
    Weights z = *this;
    z.set_zero();
    return z;
}

void Weights::set_zero() {
    visit([](const std::string&, Matrix& m) { m.setZero(); });
}

std::size_t Weights::parameter_count() const {
    std::size_t n = 0;
    visit([&n](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
}

ToyDecoder::ToyDecoder(ToyModelConfig config) : config_(std::move(config)) {
    config_.validate();
    const Eigen::Index d = config_.d_model;
    const Eigen::Index v = static_cast<Eigen::Index>(config_.vocab.size());
    const Eigen::Index h = static_cast<Eigen::Index>(config_.mlp_ratio) * d;
    weights_.tok_emb = Matrix::Zero(v, d);
    weights_.frame_w = Matrix::Zero(config_.frame_feature_dim, d);
    weights_.frame_b = Matrix::Zero(1, d);
    weights_.pos_emb = Matrix::Zero(config_.max_seq_len, d);
    weights_.layers.resize(static_cast<std::size_t>(config_.n_layers));
    for (auto& L : weights_.layers) {
        L.ln1_g = Matrix::Ones(1, d);
        L.ln1_b = Matrix::Zero(1, d);
        L.w_qkv = Matrix::Zero(d, 3 * d);
        L.b_qkv = Matrix::Zero(1, 3 * d);
        L.w_o = Matrix::Zero(d, d);
        L.b_o = Matrix::Zero(1, d);
        L.ln2_g = Matrix::Ones(1, d);
        L.ln2_b = Matrix::Zero(1, d);
        L.w_fc = Matrix::Zero(d, h);
        L.b_fc = Matrix::Zero(1, h);
        L.w_proj = Matrix::Zero(h, d);
        L.b_proj = Matrix::Zero(1, d);
    }
    weights_.lnf_g = Matrix::Ones(1, d);
    weights_.lnf_b = Matrix::Zero(1, d);
    weights_.head_w = Matrix::Zero(d, v);
    weights_.head_b = Matrix::Zero(1, v);
}

void ToyDecoder::init(std::uint64_t seed, bool zero_head) {
    std::mt19937_64 rng(seed);
    constexpr double kStd = 0.02;
    const double resid_std = kStd / std::sqrt(2.0 * config_.n_layers);
    fill_normal(weights_.tok_emb, kStd, rng);
    fill_normal(weights_.frame_w, kStd, rng);
    weights_.frame_b.setZero();
    fill_normal(weights_.pos_emb, kStd, rng);
    for (auto& L : weights_.layers) {
        L.ln1_g.setOnes();
        L.ln1_b.setZero();
        fill_normal(L.w_qkv, kStd, rng);
        L.b_qkv.setZero();
        fill_normal(L.w_o, resid_std, rng);
        L.b_o.setZero();
        L.ln2_g.setOnes();
        L.ln2_b.setZero();
        fill_normal(L.w_fc, kStd, rng);
        L.b_fc.setZero();
        fill_normal(L.w_proj, resid_std, rng);
        L.b_proj.setZero();
    }
    weights_.lnf_g.setOnes();
    weights_.lnf_b.setZero();
    if (zero_head) {
        weights_.head_w.setZero();
    } else {
        fill_normal(weights_.head_w, kStd, rng);
    }
    weights_.head_b.setZero();
}

void ToyDecoder::check_input(const InterleavedInput& input) const {
    if (input.slots.empty()) {
        throw InvalidInput("empty input sequence");
    }
    if (input.slots.size() > static_cast<std::size_t>(config_.max_seq_len)) {
        throw InvalidInput("sequence of " + std::to_string(input.slots.size()) + " slots exceeds max_seq_len " +
                           std::to_string(config_.max_seq_len));
    }
    const auto n_frames = std::count(input.slots.begin(), input.slots.end(), kFrameSlot);
    if (n_frames != input.frame_features.rows()) {
        throw InvalidInput("input has " + std::to_string(n_frames) + " frame slots but " +
                           std::to_string(input.frame_features.rows()) + " feature rows");
    }
    if (n_frames > 0 && input.frame_features.cols() != config_.frame_feature_dim) {
        throw InvalidInput("frame features have dim " + std::to_string(input.frame_features.cols()) + ", model expects " +
                           std::to_string(config_.frame_feature_dim));
    }
    const auto v = static_cast<int>(config_.vocab.size());
    for (const int s : input.slots) {
        if (s != kFrameSlot && (s < 0 || s >= v)) {
            throw InvalidInput("token id " + std::to_string(s) + " outside vocabulary");
        }
    }
}

Eigen::RowVectorXd ToyDecoder::embed_token(int token, std::size_t position) const {
    return weights_.tok_emb.row(token) + weights_.pos_emb.row(static_cast<Eigen::Index>(position));
}

Matrix ToyDecoder::forward_logits(const InterleavedInput& input) const {
    std::vector<std::size_t> rows(input.length());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i] = i;
    }
    return forward(input, rows, nullptr);
}

Matrix ToyDecoder::forward(const InterleavedInput& input, std::span<const std::size_t> rows, Tape* tape) const {
    check_input(input);
    const auto S = static_cast<Eigen::Index>(input.length());
    const Eigen::Index d = config_.d_model;
    const Eigen::Index nh = config_.n_heads;
    const Eigen::Index dh = d / nh;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    for (const auto r : rows) {
        if (r >= input.length()) {
            throw InvalidInput("requested logits row " + std::to_string(r) + " beyond sequence length " +
                               std::to_string(input.length()));
        }
    }

    Matrix x(S, d);
    Eigen::Index frame = 0;
    for (Eigen::Index t = 0; t < S; ++t) {
        const int s = input.slots[static_cast<std::size_t>(t)];
        if (s == kFrameSlot) {
            x.row(t) = input.frame_features.row(frame++) * weights_.frame_w + weights_.frame_b.row(0);
        } else {
            x.row(t) = weights_.tok_emb.row(s);
        }
        x.row(t) += weights_.pos_emb.row(t);
    }

    if (tape != nullptr) {
        tape->input = &input;
        tape->layers.clear();
        tape->layers.resize(weights_.layers.size());
        tape->rows.assign(rows.begin(), rows.end());
    }

    for (std::size_t l = 0; l < weights_.layers.size(); ++l) {
        const auto& L = weights_.layers[l];
        auto ln1 = layer_norm(x, L.ln1_g, L.ln1_b);
        Matrix qkv = add_bias(ln1.y * L.w_qkv, L.b_qkv);
        Matrix ctx(S, d);
        std::vector<Matrix> probs;
        if (tape != nullptr) {
            probs.reserve(static_cast<std::size_t>(nh));
        }
        for (Eigen::Index h = 0; h < nh; ++h) {
            const auto q = qkv.middleCols(h * dh, dh);
            const auto k = qkv.middleCols(d + h * dh, dh);
            const auto v = qkv.middleCols(2 * d + h * dh, dh);
            Matrix p = (q * k.transpose()) * scale;
            for (Eigen::Index i = 0; i < S; ++i) {
                const double mx = p.row(i).head(i + 1).maxCoeff();
                double z = 0.0;
                for (Eigen::Index j = 0; j <= i; ++j) {
                    const double e = std::exp(p(i, j) - mx);
                    p(i, j) = e;
                    z += e;
                }
                p.row(i).head(i + 1) /= z;
                p.row(i).tail(S - i - 1).setZero();
            }
            ctx.middleCols(h * dh, dh) = p * v;
            if (tape != nullptr) {
                probs.push_back(std::move(p));
            }
        }
        Matrix x1 = x + add_bias(ctx * L.w_o, L.b_o);
        auto ln2 = layer_norm(x1, L.ln2_g, L.ln2_b);
        Matrix hpre = add_bias(ln2.y * L.w_fc, L.b_fc);
        Matrix hact = gelu(hpre);
        Matrix x2 = x1 + add_bias(hact * L.w_proj, L.b_proj);

        if (tape != nullptr) {
            auto& T = tape->layers[l];
            T.x_in = std::move(x);
            T.xhat1 = std::move(ln1.xhat);
            T.rstd1 = std::move(ln1.rstd);
            T.a1 = std::move(ln1.y);
            T.qkv = std::move(qkv);
            T.probs = std::move(probs);
            T.ctx = std::move(ctx);
            T.x1 = std::move(x1);
            T.xhat2 = std::move(ln2.xhat);
            T.rstd2 = std::move(ln2.rstd);
            T.a2 = std::move(ln2.y);
            T.hpre = std::move(hpre);
            T.hact = std::move(hact);
        }
        x = std::move(x2);
    }

    auto lnf = layer_norm(x, weights_.lnf_g, weights_.lnf_b);
    Matrix selected(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        selected.row(static_cast<Eigen::Index>(i)) = lnf.y.row(static_cast<Eigen::Index>(rows[i]));
    }
    Matrix logits = add_bias(selected * weights_.head_w, weights_.head_b);
    if (tape != nullptr) {
        tape->x_final = std::move(x);
        tape->xhat_f = std::move(lnf.xhat);
        tape->rstd_f = std::move(lnf.rstd);
        tape->out_f = std::move(lnf.y);
    }
    return logits;
}

void ToyDecoder::backward(const Tape& tape, const Matrix& dlogits, Weights& grads) const {
    const InterleavedInput& input = *tape.input;
    const auto S = static_cast<Eigen::Index>(input.length());
    const Eigen::Index d = config_.d_model;
    const Eigen::Index nh = config_.n_heads;
    const Eigen::Index dh = d / nh;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    if (dlogits.rows() != static_cast<Eigen::Index>(tape.rows.size()) ||
        dlogits.cols() != static_cast<Eigen::Index>(config_.vocab.size())) {
        throw InvalidInput("backward: dlogits shape does not match the recorded rows");
    }

    Matrix selected(dlogits.rows(), d);
    for (std::size_t i = 0; i < tape.rows.size(); ++i) {
        selected.row(static_cast<Eigen::Index>(i)) = tape.out_f.row(static_cast<Eigen::Index>(tape.rows[i]));
    }
    grads.head_w.noalias() += selected.transpose() * dlogits;
    grads.head_b.row(0) += dlogits.colwise().sum();
    const Matrix dsel = dlogits * weights_.head_w.transpose();
    Matrix dout = Matrix::Zero(S, d);
    for (std::size_t i = 0; i < tape.rows.size(); ++i) {
        dout.row(static_cast<Eigen::Index>(tape.rows[i])) += dsel.row(static_cast<Eigen::Index>(i));
    }
    Matrix dx = layer_norm_backward(dout, tape.xhat_f, tape.rstd_f, weights_.lnf_g, grads.lnf_g, grads.lnf_b);

    for (std::size_t l = weights_.layers.size(); l-- > 0;) {
        const auto& L = weights_.layers[l];
        auto& G = grads.layers[l];
        const auto& T = tape.layers[l];

        // MLP branch
        G.w_proj.noalias() += T.hact.transpose() * dx;
        G.b_proj.row(0) += dx.colwise().sum();
        const Matrix dhpre = (dx * L.w_proj.transpose()).cwiseProduct(gelu_grad(T.hpre));
        G.w_fc.noalias() += T.a2.transpose() * dhpre;
        G.b_fc.row(0) += dhpre.colwise().sum();
        const Matrix da2 = dhpre * L.w_fc.transpose();
        Matrix dx1 = dx + layer_norm_backward(da2, T.xhat2, T.rstd2, L.ln2_g, G.ln2_g, G.ln2_b);

        // Attention branch
        G.w_o.noalias() += T.ctx.transpose() * dx1;
        G.b_o.row(0) += dx1.colwise().sum();
        const Matrix dctx = dx1 * L.w_o.transpose();
        Matrix dqkv(S, 3 * d);
        for (Eigen::Index h = 0; h < nh; ++h) {
            const auto q = T.qkv.middleCols(h * dh, dh);
            const auto k = T.qkv.middleCols(d + h * dh, dh);
            const auto v = T.qkv.middleCols(2 * d + h * dh, dh);
            const Matrix& p = T.probs[static_cast<std::size_t>(h)];
            const auto dctx_h = dctx.middleCols(h * dh, dh);
            const Matrix dp = dctx_h * v.transpose();
            dqkv.middleCols(2 * d + h * dh, dh) = p.transpose() * dctx_h;
            const Eigen::VectorXd inner = (p.array() * dp.array()).rowwise().sum();
            const Matrix ds = (p.array() * (dp.array().colwise() - inner.array())).matrix() * scale;
            dqkv.middleCols(h * dh, dh) = ds * k;
            dqkv.middleCols(d + h * dh, dh) = ds.transpose() * q;
        }
        G.w_qkv.noalias() += T.a1.transpose() * dqkv;
        G.b_qkv.row(0) += dqkv.colwise().sum();
        const Matrix da1 = dqkv * L.w_qkv.transpose();
        dx = dx1 + layer_norm_backward(da1, T.xhat1, T.rstd1, L.ln1_g, G.ln1_g, G.ln1_b);
    }

    Eigen::Index frame = 0;
    for (Eigen::Index t = 0; t < S; ++t) {
        grads.pos_emb.row(t) += dx.row(t);
        const int s = input.slots[static_cast<std::size_t>(t)];
        if (s == kFrameSlot) {
            grads.frame_w.noalias() += input.frame_features.row(frame++).transpose() * dx.row(t);
            grads.frame_b.row(0) += dx.row(t);
        } else {
            grads.tok_emb.row(s) += dx.row(t);
        }
    }
}

std::pair<DecoderState, Eigen::RowVectorXd> ToyDecoder::prefill(const InterleavedInput& prompt) const {
    Tape tape;
    const std::size_t last = prompt.length() - 1;
    const Matrix logits = forward(prompt, std::span<const std::size_t>(&last, 1), &tape);
    const Eigen::Index d = config_.d_model;
    DecoderState state;
    state.length = prompt.length();
    const auto capacity = static_cast<Eigen::Index>(config_.max_seq_len);
    for (const auto& T : tape.layers) {
        Matrix keys(capacity, d);
        Matrix values(capacity, d);
        keys.topRows(T.qkv.rows()) = T.qkv.middleCols(d, d);
        values.topRows(T.qkv.rows()) = T.qkv.middleCols(2 * d, d);
        state.keys.push_back(std::move(keys));
        state.values.push_back(std::move(values));
    }
    return {std::move(state), logits.row(0)};
}

Eigen::RowVectorXd ToyDecoder::step(DecoderState& state, int token) const {
    if (state.length >= static_cast<std::size_t>(config_.max_seq_len)) {
        throw InvalidInput("decoding past max_seq_len " + std::to_string(config_.max_seq_len));
    }
    if (token < 0 || static_cast<std::size_t>(token) >= config_.vocab.size()) {
        throw InvalidInput("token id " + std::to_string(token) + " outside vocabulary");
    }
    const Eigen::Index d = config_.d_model;
    const Eigen::Index nh = config_.n_heads;
    const Eigen::Index dh = d / nh;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    const auto pos = static_cast<Eigen::Index>(state.length);

    Matrix x = embed_token(token, state.length);
    for (std::size_t l = 0; l < weights_.layers.size(); ++l) {
        const auto& L = weights_.layers[l];
        const auto ln1 = layer_norm(x, L.ln1_g, L.ln1_b);
        const Matrix qkv = add_bias(ln1.y * L.w_qkv, L.b_qkv);
        state.keys[l].row(pos) = qkv.middleCols(d, d);
        state.values[l].row(pos) = qkv.middleCols(2 * d, d);
        Matrix ctx(1, d);
        for (Eigen::Index h = 0; h < nh; ++h) {
            const auto q = qkv.middleCols(h * dh, dh);
            const auto keys = state.keys[l].block(0, h * dh, pos + 1, dh);
            const auto values = state.values[l].block(0, h * dh, pos + 1, dh);
            Eigen::RowVectorXd p = (q * keys.transpose()) * scale;
            const double mx = p.maxCoeff();
            p = (p.array() - mx).exp();
            p /= p.sum();
            ctx.middleCols(h * dh, dh) = p * values;
        }
        const Matrix x1 = x + add_bias(ctx * L.w_o, L.b_o);
        const auto ln2 = layer_norm(x1, L.ln2_g, L.ln2_b);
        const Matrix hact = gelu(add_bias(ln2.y * L.w_fc, L.b_fc));
        x = x1 + add_bias(hact * L.w_proj, L.b_proj);
    }
    state.length += 1;
    const auto lnf = layer_norm(x, weights_.lnf_g, weights_.lnf_b);
    return (lnf.y * weights_.head_w + weights_.head_b).row(0);
}

// ---------------------------------------------------------------------------

std::vector<double> extract_frame_probs(const Matrix& logits, std::span<const std::size_t> answer_positions, int id0,
                                        int id1) {
    if (id0 == id1) {
        throw InvalidInput("extract_frame_probs: '0' and '1' ids must differ");
    }
    if (answer_positions.empty()) {
        throw InvalidInput("extract_frame_probs: no answer positions");
    }
    const auto v = logits.cols();
    if (id0 < 0 || id1 < 0 || id0 >= v || id1 >= v) {
        throw InvalidInput("extract_frame_probs: token id outside vocabulary");
    }
    const std::size_t frames = answer_positions.size() - 1;
    std::vector<double> out(frames);
    for (std::size_t k = 0; k < frames; ++k) {
        const auto r = answer_positions[k];
        if (r >= static_cast<std::size_t>(logits.rows())) {
            throw InvalidInput("extract_frame_probs: answer position " + std::to_string(r) + " out of range");
        }
        const auto row = static_cast<Eigen::Index>(r);
        out[k] = two_way_softmax(logits(row, id0), logits(row, id1));
    }
    return out;
}

BatchForward forward_batch(const ToyDecoder& model, std::span<const TrainExample> batch) {
    BatchForward out;
    if (batch.empty()) {
        throw InvalidInput("forward_batch: empty batch");
    }
    const std::size_t vocab = model.config().vocab.size();
    std::vector<double> answer_logits;
    std::vector<int> targets;
    for (const auto& ex : batch) {
        Matrix logits = model.forward_logits(ex.input);
        const auto positions = ex.input.answer_positions();
        if (positions.back() >= ex.input.length() || ex.targets.size() != positions.size()) {
            throw InvalidInput("forward_batch: example lacks teacher-forced answer tokens");
        }
        for (const auto p : positions) {
            const auto row = logits.row(static_cast<Eigen::Index>(p));
            answer_logits.insert(answer_logits.end(), row.data(), row.data() + vocab);
        }
        targets.insert(targets.end(), ex.targets.begin(), ex.targets.end());
        out.logits.push_back(std::move(logits));
    }
    out.lm_loss = lm_loss(answer_logits, vocab, targets).value;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

struct Beam {
    DecoderState state;
    Eigen::RowVectorXd logits;  // next-token logits
    std::vector<int> tokens;
    std::vector<double> probs;
    double score = 0.0;
    bool finished = false;
};

bool beam_before(const Beam& a, const Beam& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.tokens < b.tokens;
}

}  // namespace

DecodeResult beam_decode(const ToyDecoder& model, const InterleavedInput& prompt, int n_beams, bool constrained) {
    if (n_beams < 1) {
        throw InvalidInput("beam_decode: need at least one beam");
    }
    const auto& vocab = model.config().vocab;
    const int id0 = vocab.zero_id();
    const int id1 = vocab.one_id();
    const int eos = vocab.eos_id();
    const int frames = prompt.frames;
    const auto beams_wanted = static_cast<std::size_t>(n_beams);

    std::vector<Beam> beams(1);
    {
        auto [state, logits] = model.prefill(prompt);
        beams[0].state = std::move(state);
        beams[0].logits = std::move(logits);
    }
    std::vector<Beam> finished;

    for (int t = 0; t <= frames; ++t) {
        struct Candidate {
            std::size_t beam;
            int token;
            double score;
        };
        std::vector<Candidate> cands;
        for (std::size_t b = 0; b < beams.size(); ++b) {
            const Eigen::RowVectorXd lp = log_softmax(beams[b].logits);
            std::vector<int> allowed;
            if (constrained) {
                allowed = t < frames ? std::vector<int>{id0, id1} : std::vector<int>{eos};
            } else {
                // The best n_beams tokens of this beam are enough to fill the next beam set.
                std::vector<int> ids(static_cast<std::size_t>(lp.size()));
                for (std::size_t i = 0; i < ids.size(); ++i) {
                    ids[i] = static_cast<int>(i);
                }
                const auto keep = std::min(beams_wanted, ids.size());
                std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep), ids.end(),
                                  [&](int a, int c) { return lp(a) != lp(c) ? lp(a) > lp(c) : a < c; });
                allowed.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(keep));
            }
            for (const int tok : allowed) {
                cands.push_back({b, tok, beams[b].score + lp(tok)});
            }
        }
        std::stable_sort(cands.begin(), cands.end(), [&](const Candidate& a, const Candidate& c) {
            if (a.score != c.score) {
                return a.score > c.score;
            }
            if (a.beam != c.beam) {
                return a.beam < c.beam;
            }
            return a.token < c.token;
        });

        std::vector<Beam> next;
        for (const auto& c : cands) {
            if (next.size() == beams_wanted) {
                break;
            }
            const Beam& parent = beams[c.beam];
            Beam nb;
            nb.tokens = parent.tokens;
            nb.tokens.push_back(c.token);
            nb.probs = parent.probs;
            if (t < frames) {
                nb.probs.push_back(two_way_softmax(parent.logits(id0), parent.logits(id1)));
            }
            nb.score = c.score;
            if (c.token == eos || t == frames) {
                nb.finished = true;
                finished.push_back(std::move(nb));
                continue;
            }
            nb.state = parent.state;
            nb.logits = model.step(nb.state, c.token);
            next.push_back(std::move(nb));
        }
        beams = std::move(next);
        if (beams.empty()) {
            break;
        }
    }

    for (auto& b : beams) {
        finished.push_back(std::move(b));
    }
    const auto best = std::min_element(finished.begin(), finished.end(), beam_before);
    DecodeResult out;
    out.tokens = best->tokens;
    out.score = best->score;
    out.probs = best->probs;
    out.probs.resize(static_cast<std::size_t>(frames), 0.0);
    for (const int tok : out.tokens) {
        if (tok != eos) {
            out.text += vocab.token(tok);
        }
    }
    return out;
}

double sequence_logprob(const ToyDecoder& model, const InterleavedInput& prompt, std::span<const int> tokens) {
    auto [state, logits] = model.prefill(prompt);
    double score = 0.0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        score += log_softmax(logits)(tokens[i]);
        if (i + 1 < tokens.size()) {
            logits = model.step(state, tokens[i]);
        }
    }
    return score;
}

}  // namespace frameseg
