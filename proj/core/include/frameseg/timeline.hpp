#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace frameseg {

/// Half-open interval [start, end) in seconds.
struct TimeWindow {
    double start = 0.0;
    double end = 0.0;

    [[nodiscard]] bool contains(double t) const noexcept { return t >= start && t < end; }
    [[nodiscard]] double length() const noexcept { return end - start; }
};

/// Uniform sampling of `frames` frames over a video of `duration` seconds.
///
/// Every sampled frame owns a window of `step() = duration / frames` seconds
/// and is represented by the frame at the window center. The step is kept
/// real-valued so durations that are not a multiple of the frame count need
/// no special handling.
class Timeline {
public:
    Timeline(double duration, double fps, int frames);

    [[nodiscard]] double duration() const noexcept { return duration_; }
    [[nodiscard]] double fps() const noexcept { return fps_; }
    [[nodiscard]] int frames() const noexcept { return frames_; }
    [[nodiscard]] double step() const noexcept { return duration_ / frames_; }

    [[nodiscard]] double center(int i) const noexcept { return (i + 0.5) * step(); }
    [[nodiscard]] TimeWindow window(int i) const noexcept;

    // Index of the frame whose window contains t; t is clamped into [0, duration].
    [[nodiscard]] int frame_at(double t) const noexcept;

private:
    double duration_;
    double fps_;
    int frames_;
};

/// Raw video frame index for every sampled frame: floor(step * fps * (i + 0.5)),
/// clamped to [0, floor(duration * fps) - 1].
std::vector<std::int64_t> sample_indices(const Timeline& tl);

/// One window per sampled frame; the windows partition [0, duration).
std::vector<TimeWindow> frame_windows(const Timeline& tl);

/// Left and right variation frames `offset` raw frames away from `center_index`,
/// clamped to the video.
std::pair<std::int64_t, std::int64_t> neighbor_indices(std::int64_t center_index, std::int64_t offset,
                                                       std::int64_t total_frames);

/// Piecewise-linear interpolation of per-frame scores placed at frame centers.
/// Queries before the first center or after the last center take the edge score.
std::vector<double> interpolate_scores(std::span<const double> frame_scores, const Timeline& tl,
                                       std::span<const double> query_times);

/// Centers of consecutive clips of length `clip_len` covering [0, duration).
/// A trailing partial clip [k*clip_len, duration) is represented by its own midpoint.
std::vector<double> clip_query_times(double duration, double clip_len);

/// Number of clips of length `clip_len` needed to cover `duration`.
std::size_t clip_count(double duration, double clip_len);

}  // namespace frameseg
