#include "frameseg/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "frameseg/error.hpp"

namespace frameseg {

Timeline::Timeline(double duration, double fps, int frames) : duration_(duration), fps_(fps), frames_(frames) {
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw InvalidInput("timeline duration must be positive and finite, got " + std::to_string(duration));
    }
    if (!(fps > 0.0) || !std::isfinite(fps)) {
        throw InvalidInput("timeline fps must be positive and finite, got " + std::to_string(fps));
    }
    if (frames < 1) {
        throw InvalidInput("timeline needs at least one frame, got " + std::to_string(frames));
    }
}

TimeWindow Timeline::window(int i) const noexcept {
    // Last window ends at the duration exactly, independent of rounding in step().
    const double end = (i + 1 == frames_) ? duration_ : (i + 1) * step();
    return {i * step(), end};
}

int Timeline::frame_at(double t) const noexcept {
    const double clamped = std::clamp(t, 0.0, duration_);
    const auto i = static_cast<int>(std::floor(clamped / step()));
    return std::clamp(i, 0, frames_ - 1);
}

std::vector<std::int64_t> sample_indices(const Timeline& tl) {
    const auto last = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor(tl.duration() * tl.fps())) - 1);
    std::vector<std::int64_t> out;
    out.reserve(static_cast<std::size_t>(tl.frames()));
    for (int i = 0; i < tl.frames(); ++i) {
        const double v = tl.step() * tl.fps() * (0.5 + i);
        out.push_back(std::clamp(static_cast<std::int64_t>(std::floor(v)), std::int64_t{0}, last));
    }
    return out;
}

std::vector<TimeWindow> frame_windows(const Timeline& tl) {
    std::vector<TimeWindow> out;
    out.reserve(static_cast<std::size_t>(tl.frames()));
    for (int i = 0; i < tl.frames(); ++i) {
        out.push_back(tl.window(i));
    }
    return out;
}

std::pair<std::int64_t, std::int64_t> neighbor_indices(std::int64_t center_index, std::int64_t offset,
                                                       std::int64_t total_frames) {
    return {std::max<std::int64_t>(center_index - offset, 0),
            std::min<std::int64_t>(center_index + offset, total_frames - 1)};
}

std::vector<double> interpolate_scores(std::span<const double> frame_scores, const Timeline& tl,
                                       std::span<const double> query_times) {
    if (frame_scores.empty()) {
        throw InvalidInput("interpolate_scores: empty frame score list");
    }
    if (frame_scores.size() != static_cast<std::size_t>(tl.frames())) {
        throw InvalidInput("interpolate_scores: expected " + std::to_string(tl.frames()) + " frame scores, got " +
                           std::to_string(frame_scores.size()));
    }
    const int f = tl.frames();
    std::vector<double> out;
    out.reserve(query_times.size());
    for (const double q : query_times) {
        if (q <= tl.center(0)) {
            out.push_back(frame_scores.front());
            continue;
        }
        if (q >= tl.center(f - 1)) {
            out.push_back(frame_scores.back());
            continue;
        }
        // q lies strictly between center(0) and center(f-1), so f >= 2 here.
        int left = static_cast<int>(std::floor(q / tl.step() - 0.5));
        left = std::clamp(left, 0, f - 2);
        const double t0 = tl.center(left);
        const double t1 = tl.center(left + 1);
        const double a = std::clamp((q - t0) / (t1 - t0), 0.0, 1.0);
        const double s0 = frame_scores[static_cast<std::size_t>(left)];
        const double s1 = frame_scores[static_cast<std::size_t>(left) + 1];
        out.push_back(a == 1.0 ? s1 : s0 + a * (s1 - s0));
    }
    return out;
}

std::size_t clip_count(double duration, double clip_len) {
    if (!(clip_len > 0.0)) {
        throw InvalidInput("clip length must be positive");
    }
    if (!(duration > 0.0)) {
        return 0;
    }
    return static_cast<std::size_t>(std::ceil(duration / clip_len));
}

std::vector<double> clip_query_times(double duration, double clip_len) {
    const std::size_t n = clip_count(duration, clip_len);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double start = static_cast<double>(k) * clip_len;
        const double end = std::min(start + clip_len, duration);
        out.push_back(0.5 * (start + end));
    }
    return out;
}

}  // namespace frameseg
