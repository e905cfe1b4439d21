#include "frameseg/maskcodec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "frameseg/error.hpp"

namespace frameseg {

bool FrameMask::consistent() const {
    if (!probs) {
        return true;
    }
    if (probs->size() != bits.size()) {
        return false;
    }
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if ((bits[i] != 0) != ((*probs)[i] >= 0.5)) {
            return false;
        }
    }
    return true;
}

FrameMask parse_mask(std::string_view text, int frames, ParseMode mode) {
    if (frames < 1) {
        throw InvalidInput("parse_mask: frame count must be >= 1");
    }
    const auto f = static_cast<std::size_t>(frames);
    FrameMask mask;
    mask.bits.reserve(f);

    if (mode == ParseMode::strict) {
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] != '0' && text[i] != '1') {
                throw ParseError("mask: invalid character '" + std::string(1, text[i]) + "' at position " +
                                     std::to_string(i),
                                 i);
            }
        }
        if (text.size() != f) {
            throw ParseError("mask: expected " + std::to_string(f) + " characters, got " + std::to_string(text.size()),
                             std::min(text.size(), f));
        }
        for (const char c : text) {
            mask.bits.push_back(c == '1' ? 1 : 0);
        }
        return mask;
    }

    for (const char c : text) {
        if (mask.bits.size() == f) {
            break;
        }
        if (c == '0' || c == '1') {
            mask.bits.push_back(c == '1' ? 1 : 0);
        }
    }
    if (mask.bits.size() < f) {
        spdlog::debug("mask: padded {} missing frame(s) with '0'", f - mask.bits.size());
        mask.bits.resize(f, 0);
    }
    return mask;
}

std::string render_mask(std::span<const std::uint8_t> bits) {
    std::string out;
    out.reserve(bits.size());
    for (const auto b : bits) {
        out.push_back(b != 0 ? '1' : '0');
    }
    return out;
}

std::vector<MomentSpan> mask_to_moments(std::span<const std::uint8_t> bits, const Timeline& tl) {
    if (bits.size() != static_cast<std::size_t>(tl.frames())) {
        throw InvalidInput("mask_to_moments: mask has " + std::to_string(bits.size()) + " frames, timeline has " +
                           std::to_string(tl.frames()));
    }
    std::vector<MomentSpan> out;
    const int f = tl.frames();
    int i = 0;
    while (i < f) {
        if (bits[static_cast<std::size_t>(i)] == 0) {
            ++i;
            continue;
        }
        const int run_start = i;
        while (i < f && bits[static_cast<std::size_t>(i)] != 0) {
            ++i;
        }
        out.push_back({tl.window(run_start).start, tl.window(i - 1).end, std::nullopt});
    }
    return out;
}

Bits moments_to_mask(std::span<const MomentSpan> spans, const Timeline& tl) {
    Bits bits(static_cast<std::size_t>(tl.frames()), 0);
    for (int i = 0; i < tl.frames(); ++i) {
        const double c = tl.center(i);
        for (const auto& s : spans) {
            if (c >= s.start && c < s.end) {
                bits[static_cast<std::size_t>(i)] = 1;
                break;
            }
        }
    }
    return bits;
}

std::vector<MomentSpan> score_spans(std::span<const MomentSpan> spans, std::span<const double> probs,
                                    const Timeline& tl) {
    if (probs.size() != static_cast<std::size_t>(tl.frames())) {
        throw InvalidInput("score_spans: expected " + std::to_string(tl.frames()) + " probabilities, got " +
                           std::to_string(probs.size()));
    }
    std::vector<MomentSpan> out(spans.begin(), spans.end());
    for (auto& s : out) {
        double sum = 0.0;
        int n = 0;
        for (int i = 0; i < tl.frames(); ++i) {
            const double c = tl.center(i);
            if (c >= s.start && c < s.end) {
                sum += probs[static_cast<std::size_t>(i)];
                ++n;
            }
        }
        if (n > 0) {
            s.confidence = sum / n;
        } else {
            const int nearest = tl.frame_at(0.5 * (s.start + s.end));
            spdlog::warn("span [{}, {}) covers no frame center; using frame {}", s.start, s.end, nearest);
            s.confidence = probs[static_cast<std::size_t>(nearest)];
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const MomentSpan& a, const MomentSpan& b) {
        if (*a.confidence != *b.confidence) {
            return *a.confidence > *b.confidence;
        }
        return a.start < b.start;
    });
    return out;
}

}  // namespace frameseg
