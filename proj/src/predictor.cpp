#include "dhr/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "dhr/error.hpp"

namespace dhr {

PoseHistory::PoseHistory(const Intrinsics& intr, std::size_t capacity) : intr_(intr), ring_(capacity)
{
    if (capacity == 0) throw ConfigError("pose history capacity must be positive");
}

void PoseHistory::record(FrameIndex frame, const CameraPose& pose)
{
    if (const auto last = latest(); last && frame <= *last) {
        throw ContractViolation("pose history frames must increase: got " + std::to_string(frame) + " after " +
                                std::to_string(*last));
    }
    CameraPose tagged = pose;
    tagged.frame_index = frame;
    ring_[head_] = PoseRecord{frame, tagged, view_projection(tagged, intr_, true)};
    head_ = (head_ + 1) % ring_.size();
    count_ = std::min(count_ + 1, ring_.size());
}

std::optional<FrameIndex> PoseHistory::latest() const
{
    if (count_ == 0) return std::nullopt;
    return ring_[(head_ + ring_.size() - 1) % ring_.size()].frame;
}

const PoseRecord* PoseHistory::find(FrameIndex frame) const
{
    for (std::size_t k = 1; k <= count_; ++k) {
        const PoseRecord& rec = ring_[(head_ + ring_.size() - k) % ring_.size()];
        if (rec.frame == frame) return &rec;
        if (rec.frame < frame) break;
    }
    return nullptr;
}

const PoseRecord& PoseHistory::lookup(FrameIndex frame) const
{
    if (const PoseRecord* rec = find(frame)) return *rec;
    throw RangeError("frame " + std::to_string(frame) + " is not in the pose history");
}

bool PoseHistory::contains(FrameIndex frame) const { return find(frame) != nullptr; }

RenderChoice choose_render_frame(FrameIndex n, FrameIndex m, int x_max)
{
    if (m > n) throw ProtocolError("bitmap frame " + std::to_string(m) + " is ahead of client frame " + std::to_string(n));
    if (x_max < 0) throw ContractViolation("x_max must be non-negative");
    const FrameIndex p = n - m;
    const FrameIndex x = std::min<FrameIndex>(x_max, p);
    return {m + x, x, p};
}

Prediction reproject_visibility(const VisibilityBitmap& received, const ViewProjection& old_view_projection,
                                const GBuffer& gbuffer, const Intrinsics& intr)
{
    const int bw = intr.buffer_width(true);
    const int bh = intr.buffer_height(true);
    if (received.width() != bw || received.height() != bh) {
        throw ContractViolation("received bitmap does not match the enlarged buffer size");
    }
    if (gbuffer.width != intr.display_width || gbuffer.height != intr.display_height) {
        throw ContractViolation("G-Buffer does not match the display size");
    }

    Prediction out{VisibilityBitmap(gbuffer.width, gbuffer.height, received.num_lights(), gbuffer.frame_index),
                   std::vector<SampleOutcome>(gbuffer.valid.size(), SampleOutcome::invalid)};
    for (int y = 0; y < gbuffer.height; ++y) {
        for (int x = 0; x < gbuffer.width; ++x) {
            const std::size_t i = gbuffer.index(x, y);
            if (!gbuffer.valid[i]) continue;
            const auto s = project_to_pixel(old_view_projection, gbuffer.world_position[i], bw, bh);
            // point sampling: the pixel whose area contains the projected point, i.e. the nearest centre
            const double fx = s ? std::floor(s->x) : -1.0;
            const double fy = s ? std::floor(s->y) : -1.0;
            if (s && fx >= 0.0 && fy >= 0.0 && fx < bw && fy < bh) {
                const auto src = received.pixel(static_cast<int>(fx), static_cast<int>(fy));
                std::copy(src.begin(), src.end(), out.bits.pixel(x, y).begin());
                out.outcome[i] = SampleOutcome::sampled;
            } else {
                out.bits.set_all(x, y);
                out.outcome[i] = SampleOutcome::out_of_range;
            }
        }
    }
    return out;
}

Prediction missing_visibility(const GBuffer& gbuffer, int num_lights, MissingPolicy policy)
{
    Prediction out{VisibilityBitmap(gbuffer.width, gbuffer.height, num_lights, gbuffer.frame_index),
                   std::vector<SampleOutcome>(gbuffer.valid.size(), SampleOutcome::invalid)};
    for (int y = 0; y < gbuffer.height; ++y) {
        for (int x = 0; x < gbuffer.width; ++x) {
            const std::size_t i = gbuffer.index(x, y);
            if (!gbuffer.valid[i]) continue;
            out.outcome[i] = SampleOutcome::no_bitmap;
            if (policy == MissingPolicy::all_visible) out.bits.set_all(x, y);
        }
    }
    return out;
}

} // namespace dhr
