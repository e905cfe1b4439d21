#include <doctest.h>

#include <cmath>
#include <random>

#include "frameseg/error.hpp"
#include "frameseg/model.hpp"
#include "frameseg/training.hpp"
#include "test_support.hpp"

using namespace frameseg;

namespace {

Vocab small_vocab() { return Vocab::build({"alpha beta gamma delta"}); }

ToyDecoder small_model(const Vocab& vocab, std::uint64_t seed, int d_model = 8, int feature_dim = 3,
                       int max_len = 24) {
    ToyModelConfig cfg;
    cfg.d_model = d_model;
    cfg.n_layers = 2;
    cfg.n_heads = 2;
    cfg.mlp_ratio = 2;
    cfg.frame_feature_dim = feature_dim;
    cfg.frames = 2;
    cfg.max_seq_len = max_len;
    cfg.vocab = vocab;
    ToyDecoder m(cfg);
    m.init(seed);
    return m;
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = n(rng);
    }
    return m;
}

// alpha <image> beta <image> gamma 0 1 : five prompt slots, two answer tokens.
InterleavedInput hand_input(const Vocab& v, std::mt19937_64& rng, int feature_dim = 3) {
    InterleavedInput in;
    in.slots = {v.id("alpha"), kFrameSlot, v.id("beta"), kFrameSlot, v.id("gamma"), v.zero_id(), v.one_id()};
    in.frame_features = random_matrix(rng, 2, feature_dim);
    in.prompt_length = 5;
    in.frames = 2;
    return in;
}

Features random_features(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
    Features f{rows, cols, std::vector<double>(rows * cols)};
    std::normal_distribution<double> n(0.0, 1.0);
    for (auto& x : f.values) {
        x = n(rng);
    }
    return f;
}

double weighted_sum(const ToyDecoder& m, const InterleavedInput& in, const std::vector<std::size_t>& rows,
                    const Matrix& g) {
    return m.forward(in, rows, nullptr).cwiseProduct(g).sum();
}

}  // namespace

TEST_CASE("tokenizer and vocabulary") {
    const auto toks = tokenize("Frame 12: <image>\n**Activity**: dog's run");
    const std::vector<std::string> want{"Frame", "1", "2", ":", "<image>", "*", "*", "Activity",
                                        "*", "*", ":", "dog", "'", "s", "run"};
    CHECK(toks == want);

    const Vocab v = small_vocab();
    REQUIRE(v.size() == 9);
    CHECK(v.token(0) == "<unk>");
    CHECK(v.token(1) == "<eos>");
    CHECK(v.token(2) == "<image>");
    CHECK(v.token(3) == "0");
    CHECK(v.token(4) == "1");
    CHECK(v.token(5) == "alpha");
    CHECK(v.id("zebra") == v.unk_id());
    CHECK(Vocab::from_tokens(v.tokens()) == v);
    CHECK_THROWS_AS((void)v.token(99), InvalidInput);
}

TEST_CASE("prompt input layout") {
    const int frames = 5;
    const std::vector<VideoSample> samples{{1, "a dog runs", 30.0, std::nullopt, {{6.0, 18.0, {}}}, {}, {}}};
    const Vocab v = Vocab::build(vocabulary_texts(samples, frames, false));
    std::mt19937_64 rng(3);
    const auto in = make_prompt_input(v, "a dog runs", random_features(rng, frames, 4), frames, false);
    CHECK(std::count(in.slots.begin(), in.slots.end(), kFrameSlot) == frames);
    CHECK(in.frame_features.rows() == frames);
    CHECK(in.prompt_length == in.length());
    CHECK(std::count(in.slots.begin(), in.slots.end(), v.unk_id()) == 0);
    const auto pos = in.answer_positions();
    REQUIRE(pos.size() == frames + 1);
    CHECK(pos.front() == in.prompt_length - 1);

    VideoSample s = samples[0];
    s.variants = {random_features(rng, frames, 4)};
    const auto ex = make_train_example(v, s, s.variants[0], frames, false);
    CHECK(ex.input.length() == in.length() + frames);
    REQUIRE(ex.targets.size() == frames + 1);
    CHECK(render_mask(ex.labels) == "01100");
    CHECK(ex.targets[0] == v.zero_id());
    CHECK(ex.targets[1] == v.one_id());
    CHECK(ex.targets.back() == v.eos_id());

    // Fewer feature rows than frames are padded, more are dropped.
    CHECK(make_prompt_input(v, "a dog runs", random_features(rng, 3, 4), frames, false).frame_features.rows() ==
          frames);
    CHECK(make_prompt_input(v, "a dog runs", random_features(rng, 9, 4), frames, false).frame_features.rows() ==
          frames);
}

TEST_CASE("zero output head gives uniform predictions") {
    const Vocab v = small_vocab();
    ToyDecoder m = small_model(v, 1);
    m.init(1, true);
    std::mt19937_64 rng(1);
    const auto in = hand_input(v, rng);
    const Matrix logits = m.forward_logits(in);
    CHECK(logits.cwiseAbs().maxCoeff() == 0.0);

    TrainExample ex{in, {v.zero_id(), v.one_id(), v.eos_id()}, {0, 1}};
    ex.input.prompt_length = 5;
    const std::vector<TrainExample> batch{ex};
    const auto fb = forward_batch(m, batch);
    CHECK(fb.lm_loss == doctest::Approx(std::log(static_cast<double>(v.size()))).epsilon(1e-12));
    const auto probs = extract_frame_probs(fb.logits[0], ex.input.answer_positions(), v.zero_id(), v.one_id());
    CHECK(probs == std::vector<double>{0.5, 0.5});
}

TEST_CASE("decoder is causal") {
    const Vocab v = small_vocab();
    const ToyDecoder m = small_model(v, 2);
    std::mt19937_64 rng(2);
    const auto in = hand_input(v, rng);
    const Matrix base = m.forward_logits(in);

    auto later_token = in;
    later_token.slots[4] = v.id("delta");
    const Matrix a = m.forward_logits(later_token);
    CHECK(a.topRows(4) == base.topRows(4));
    CHECK((a.row(4) - base.row(4)).cwiseAbs().maxCoeff() > 0.0);

    auto later_frame = in;
    later_frame.frame_features.row(1) *= -3.0;
    const Matrix b = m.forward_logits(later_frame);
    CHECK(b.topRows(3) == base.topRows(3));
    CHECK((b.row(3) - base.row(3)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("forward rows and batch members are independent") {
    const Vocab v = small_vocab();
    const ToyDecoder m = small_model(v, 3);
    std::mt19937_64 rng(3);
    const auto a = hand_input(v, rng);
    auto b = hand_input(v, rng);
    b.slots[0] = v.id("delta");

    const Matrix full = m.forward_logits(a);
    const std::vector<std::size_t> rows{4, 1};
    const Matrix sel = m.forward(a, rows, nullptr);
    CHECK(sel.row(0) == full.row(4));
    CHECK(sel.row(1) == full.row(1));

    const std::vector<TrainExample> solo{{a, {v.zero_id(), v.one_id(), v.eos_id()}, {0, 1}}};
    const std::vector<TrainExample> pair{{b, {v.one_id(), v.one_id(), v.eos_id()}, {1, 1}}, solo[0]};
    const auto fs = forward_batch(m, solo);
    const auto fp = forward_batch(m, pair);
    CHECK(fp.logits[1] == fs.logits[0]);
    CHECK_THROWS_AS((void)m.forward_logits([&] {
                        auto bad = a;
                        bad.slots[0] = 999;
                        return bad;
                    }()),
                    InvalidInput);
    CHECK_THROWS_AS((void)m.forward_logits([&] {
                        auto bad = a;
                        bad.frame_features = Matrix::Zero(1, 3);
                        return bad;
                    }()),
                    InvalidInput);
}

TEST_CASE("backward matches finite differences") {
    const Vocab v = small_vocab();
    ToyDecoder m = small_model(v, 4);
    std::mt19937_64 rng(4);
    // Larger weights make every nonlinearity matter in the check.
    m.weights().visit([&](const std::string&, Matrix& w) { w += 0.3 * random_matrix(rng, w.rows(), w.cols()); });
    const auto in = hand_input(v, rng);
    const std::vector<std::size_t> rows{1, 3, 4, 6};
    const Matrix g = random_matrix(rng, static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(v.size()));

    Tape tape;
    (void)m.forward(in, rows, &tape);
    Weights grads = m.weights().zeros_like();
    m.backward(tape, g, grads);

    std::vector<std::pair<std::string, double>> analytic;
    grads.visit([&](const std::string& name, const Matrix& w) {
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            analytic.emplace_back(name + "#" + std::to_string(i), w.data()[i]);
        }
    });

    constexpr double h = 1e-5;
    double worst = 0.0;
    std::string worst_name;
    std::size_t flat = 0;
    std::size_t checked = 0;
    m.weights().visit([&](const std::string&, Matrix& w) {
        for (Eigen::Index i = 0; i < w.size(); ++i, ++flat) {
            const double an = analytic[flat].second;
            // Untouched positional rows and tokens have exactly zero gradient; sample the rest sparsely.
            if (an == 0.0 && flat % 7 != 0) {
                continue;
            }
            if (flat % 3 != 0 && an != 0.0) {
                continue;
            }
            const double keep = w.data()[i];
            w.data()[i] = keep + h;
            const double up = weighted_sum(m, in, rows, g);
            w.data()[i] = keep - h;
            const double down = weighted_sum(m, in, rows, g);
            w.data()[i] = keep;
            const double num = (up - down) / (2 * h);
            const double err = std::abs(an - num) / std::max({std::abs(an), std::abs(num), 1e-4});
            if (err > worst) {
                worst = err;
                worst_name = analytic[flat].first;
            }
            ++checked;
        }
    });
    INFO("worst tensor element: " << worst_name);
    CHECK(checked > 200);
    CHECK(worst < 1e-5);
}

TEST_CASE("incremental decoding matches the full forward pass") {
    const Vocab v = small_vocab();
    const ToyDecoder m = small_model(v, 5);
    std::mt19937_64 rng(5);
    auto full = hand_input(v, rng);
    full.slots.push_back(v.eos_id());
    const Matrix ref = m.forward_logits(full);

    auto prompt = full;
    prompt.slots.resize(5);
    auto [state, last] = m.prefill(prompt);
    CHECK((last - ref.row(4)).cwiseAbs().maxCoeff() < 1e-12);
    for (std::size_t p = 5; p < full.length(); ++p) {
        const Eigen::RowVectorXd step = m.step(state, full.slots[p]);
        CHECK((step - ref.row(static_cast<Eigen::Index>(p))).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(state.length == full.length());

    // Running past the position table is an error, not silent wrap-around.
    const ToyDecoder tiny = small_model(v, 5, 8, 3, 8);
    auto [s2, l2] = tiny.prefill(prompt);
    (void)tiny.step(s2, 3);
    (void)tiny.step(s2, 3);
    (void)tiny.step(s2, 3);
    CHECK_THROWS_AS((void)tiny.step(s2, 3), InvalidInput);
}

TEST_CASE("frame probabilities from answer logits") {
    Matrix logits = Matrix::Zero(4, 6);
    logits(1, 3) = 0.0;
    logits(1, 4) = std::log(3.0);  // p = 0.75
    logits(2, 3) = 2.0;
    logits(2, 4) = 0.0;
    logits(3, 4) = 50.0;  // end-token row, ignored
    const std::vector<std::size_t> pos{1, 2, 3};
    const auto p = extract_frame_probs(logits, pos, 3, 4);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == doctest::Approx(0.75));
    CHECK(p[1] == doctest::Approx(1.0 / (1.0 + std::exp(2.0))));
    const std::vector<std::size_t> bad{9, 1, 2};
    CHECK_THROWS_AS(extract_frame_probs(logits, bad, 3, 4), InvalidInput);
    CHECK_THROWS_AS(extract_frame_probs(logits, pos, 3, 7), InvalidInput);
}

TEST_CASE("constrained beam search") {
    const Vocab v = small_vocab();
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        ToyDecoder m = small_model(v, 100 + static_cast<std::uint64_t>(trial));
        m.weights().visit([&](const std::string&, Matrix& w) { w += 0.5 * random_matrix(rng, w.rows(), w.cols()); });
        auto prompt = hand_input(v, rng);
        prompt.slots.resize(5);

        const auto greedy = beam_decode(m, prompt, 1, true);
        const auto mask = parse_mask(greedy.text, 2, ParseMode::strict);
        CHECK(FrameMask{mask.bits, greedy.probs}.consistent());
        CHECK(greedy.tokens.back() == v.eos_id());
        CHECK(sequence_logprob(m, prompt, greedy.tokens) == doctest::Approx(greedy.score).epsilon(1e-12));

        // Four beams cover every two-frame answer, so the search is exact.
        double best = -1e300;
        for (int code = 0; code < 4; ++code) {
            const std::vector<int> toks{(code & 2) != 0 ? v.one_id() : v.zero_id(),
                                        (code & 1) != 0 ? v.one_id() : v.zero_id(), v.eos_id()};
            best = std::max(best, sequence_logprob(m, prompt, toks));
        }
        const auto wide = beam_decode(m, prompt, 4, true);
        CHECK(wide.score == doctest::Approx(best).epsilon(1e-12));
        CHECK(wide.score >= greedy.score - 1e-12);
        CHECK(parse_mask(wide.text, 2, ParseMode::strict).bits.size() == 2);

        const auto free = beam_decode(m, prompt, 2, false);
        CHECK(free.tokens.size() <= 3);
        CHECK(free.probs.size() == 2);
    }
    CHECK_THROWS_AS(beam_decode(small_model(v, 1), hand_input(v, rng), 0, true), InvalidInput);
}

TEST_CASE("a single sample can be memorized") {
    const int frames = 25;
    VideoSample s;
    s.qid = 9;
    s.query = "a chef slices onions";
    s.duration = 150.0;
    s.gt_spans = {{72.0, 132.0, {}}, {138.0, 144.0, {}}};
    std::mt19937_64 rng(11);
    s.variants = {random_features(rng, frames, 6)};
    const std::string golden = testing_support::fixture("golden_answer_mask.txt");
    CHECK(render_mask(sample_labels(s, frames)) == golden);

    const Vocab v = Vocab::build(vocabulary_texts({s}, frames, false));
    const auto ex = make_train_example(v, s, s.variants[0], frames, false);
    ToyModelConfig cfg;
    cfg.d_model = 32;
    cfg.n_heads = 4;
    cfg.frame_feature_dim = 6;
    cfg.frames = frames;
    cfg.max_seq_len = static_cast<int>(ex.input.length()) + 4;
    cfg.vocab = v;
    ToyDecoder m(cfg);
    m.init(5);
    AdamW opt(m.weights(), AdamWConfig{});
    const std::vector<TrainExample> batch{ex};
    const std::vector<std::span<const TrainExample>> micro{batch};
    double total = 1e9;
    for (int step = 0; step < 200 && total >= 0.05; ++step) {
        total = train_step(m, opt, micro, default_end_weights(), LossParams{}, 3e-3).total;
    }
    CHECK(total < 0.05);
    const auto out = beam_decode(m, make_prompt_input(v, s.query, s.variants[0], frames, false), 2, true);
    CHECK(out.text == golden);
}
