#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "frameseg/timeline.hpp"

namespace frameseg {

using Bits = std::vector<std::uint8_t>;

/// Per-frame foreground decision, optionally with the foreground probability
/// each decision came from.
struct FrameMask {
    Bits bits;
    std::optional<std::vector<double>> probs;

    [[nodiscard]] std::size_t size() const noexcept { return bits.size(); }
    // bits[i] == (probs[i] >= 0.5) for every frame; true when probs are absent.
    [[nodiscard]] bool consistent() const;
};

/// A predicted or ground-truth moment, [start, end) in seconds.
struct MomentSpan {
    double start = 0.0;
    double end = 0.0;
    std::optional<double> confidence;

    [[nodiscard]] double length() const noexcept { return end - start; }
    friend bool operator==(const MomentSpan&, const MomentSpan&) = default;
};

enum class ParseMode { strict, lenient };

/// Parse a generated '0'/'1' string into f frame bits.
///
/// strict: exactly f characters, all in {0,1}; otherwise ParseError with the
/// offending character position (or the length as position on a size mismatch).
/// lenient: drop every other character, truncate to f, right-pad with '0'.
FrameMask parse_mask(std::string_view text, int frames, ParseMode mode);

std::string render_mask(std::span<const std::uint8_t> bits);

/// Maximal runs of ones become spans covering the runs' frame windows.
std::vector<MomentSpan> mask_to_moments(std::span<const std::uint8_t> bits, const Timeline& tl);

/// Frame i is foreground iff its center falls inside any span.
Bits moments_to_mask(std::span<const MomentSpan> spans, const Timeline& tl);

/// Attach mean foreground probability (over frames centered inside the span)
/// as confidence and order by confidence, highest first. Ties keep the
/// earlier start first.
std::vector<MomentSpan> score_spans(std::span<const MomentSpan> spans, std::span<const double> probs,
                                    const Timeline& tl);

}  // namespace frameseg
