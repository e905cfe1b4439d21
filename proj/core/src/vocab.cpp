#include "frameseg/vocab.hpp"

#include <algorithm>
#include <set>

#include "frameseg/error.hpp"

namespace frameseg {

namespace {

bool is_letter(unsigned char c) { return std::isalpha(c) != 0 || c >= 0x80; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (text.substr(i, Vocab::kImage.size()) == Vocab::kImage) {
            out.emplace_back(Vocab::kImage);
            i += Vocab::kImage.size();
        } else if (std::isspace(c) != 0) {
            ++i;
        } else if (is_letter(c)) {
            std::size_t j = i;
            while (j < text.size() && is_letter(static_cast<unsigned char>(text[j]))) {
                ++j;
            }
            out.emplace_back(text.substr(i, j - i));
            i = j;
        } else {
            out.emplace_back(1, text[i]);
            ++i;
        }
    }
    return out;
}

Vocab::Vocab() { assign({}); }

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
    Vocab v;
    v.assign(std::move(tokens));
    return v;
}

void Vocab::assign(std::vector<std::string> tokens) {
    const std::vector<std::string> specials = {std::string(kUnk), std::string(kEos), std::string(kImage),
                                               std::string(kZero), std::string(kOne)};
    if (tokens.empty()) {
        tokens = specials;
    }
    if (tokens.size() < specials.size() || !std::equal(specials.begin(), specials.end(), tokens.begin())) {
        throw InvalidInput("vocabulary must start with <unk>, <eos>, <image>, 0, 1");
    }
    std::unordered_map<std::string, int> index;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!index.emplace(tokens[i], static_cast<int>(i)).second) {
            throw InvalidInput("duplicate vocabulary token '" + tokens[i] + "'");
        }
    }
    tokens_ = std::move(tokens);
    index_ = std::move(index);
}

Vocab Vocab::build(const std::vector<std::string>& texts) {
    std::vector<std::string> tokens = {std::string(kUnk), std::string(kEos), std::string(kImage), std::string(kZero),
                                       std::string(kOne)};
    std::set<std::string> seen(tokens.begin(), tokens.end());
    std::set<std::string> words;
    for (const auto& t : texts) {
        for (auto& tok : tokenize(t)) {
            if (!seen.contains(tok)) {
                words.insert(std::move(tok));
            }
        }
    }
    tokens.insert(tokens.end(), words.begin(), words.end());
    return from_tokens(std::move(tokens));
}

int Vocab::id(std::string_view token) const {
    const auto it = index_.find(std::string(token));
    return it == index_.end() ? unk_id() : it->second;
}

const std::string& Vocab::token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
        throw InvalidInput("token id " + std::to_string(id) + " outside vocabulary of " +
                           std::to_string(tokens_.size()));
    }
    return tokens_[static_cast<std::size_t>(id)];
}

}  // namespace frameseg
