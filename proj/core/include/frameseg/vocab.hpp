#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace frameseg {

/// Word-level tokenization: runs of letters form one token, every digit and
/// every punctuation character is its own token, "<image>" is kept whole and
/// whitespace is dropped. Digits splitting keeps '0' and '1' single tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Ordered token list. The first five entries are always
/// "<unk>", "<eos>", "<image>", "0", "1".
class Vocab {
public:
    static constexpr std::string_view kUnk = "<unk>";
    static constexpr std::string_view kEos = "<eos>";
    static constexpr std::string_view kImage = "<image>";
    static constexpr std::string_view kZero = "0";
    static constexpr std::string_view kOne = "1";

    Vocab();

    /// Specials followed by every distinct token of `texts`, sorted.
    static Vocab build(const std::vector<std::string>& texts);
    /// Restores a vocabulary from its token list (e.g. from a checkpoint).
    static Vocab from_tokens(std::vector<std::string> tokens);

    [[nodiscard]] int id(std::string_view token) const;
    [[nodiscard]] const std::string& token(int id) const;
    [[nodiscard]] std::size_t size() const noexcept { return tokens_.size(); }
    [[nodiscard]] const std::vector<std::string>& tokens() const noexcept { return tokens_; }

    [[nodiscard]] int unk_id() const noexcept { return 0; }
    [[nodiscard]] int eos_id() const noexcept { return 1; }
    [[nodiscard]] int image_id() const noexcept { return 2; }
    [[nodiscard]] int zero_id() const noexcept { return 3; }
    [[nodiscard]] int one_id() const noexcept { return 4; }

    friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

private:
    void assign(std::vector<std::string> tokens);

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

}  // namespace frameseg
