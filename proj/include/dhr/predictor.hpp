#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dhr/camera.hpp"
#include "dhr/gbuffer.hpp"
#include "dhr/visibility.hpp"

namespace dhr {

struct PoseRecord {
    FrameIndex frame = -1;
    CameraPose pose;
    ViewProjection view_projection; ///< for the enlarged buffer
};

/// Fixed-capacity ring of the most recent camera poses and their enlarged view-projection matrices.
class PoseHistory {
public:
    explicit PoseHistory(const Intrinsics& intr, std::size_t capacity = 256);

    /// `frame` must exceed every frame recorded so far.
    void record(FrameIndex frame, const CameraPose& pose);

    /// Throws RangeError when `frame` was never recorded or has been evicted.
    const PoseRecord& lookup(FrameIndex frame) const;
    bool contains(FrameIndex frame) const;

    std::size_t size() const { return count_; }
    std::size_t capacity() const { return ring_.size(); }
    std::optional<FrameIndex> latest() const;

private:
    const PoseRecord* find(FrameIndex frame) const;

    Intrinsics intr_;
    std::vector<PoseRecord> ring_;
    std::size_t head_ = 0; ///< slot the next record goes into
    std::size_t count_ = 0;
};

enum class MissingPolicy {
    empty_bitmap, ///< shade with every light blocked until the first bitmap arrives
    all_visible,
};

struct PredictionPolicy {
    int x_max = 0;
    MissingPolicy on_missing = MissingPolicy::empty_bitmap;
};

/// n: client frame, m: newest received bitmap, p = n - m, x = min(x_max, p), r = m + x.
struct RenderChoice {
    FrameIndex r = 0;
    FrameIndex x = 0;
    FrameIndex p = 0;
    FrameIndex lag() const { return p - x; }
};

/// Throws ProtocolError when m > n.
RenderChoice choose_render_frame(FrameIndex n, FrameIndex m, int x_max);

enum class SampleOutcome : std::uint8_t {
    sampled,      ///< copied from the received buffer
    out_of_range, ///< reprojected outside the received buffer (or behind the old camera): all lights visible
    invalid,      ///< background pixel, never shaded
    no_bitmap,    ///< nothing received yet; filled per MissingPolicy
};

/// Display-resolution visibility for the frame being shaded, with per-pixel provenance.
struct Prediction {
    VisibilityBitmap bits;
    std::vector<SampleOutcome> outcome;
};

/// Gathers, for every valid G-Buffer pixel, the received bitmask at the nearest pixel to where its
/// world position projected under the old camera. `received` must be the enlarged buffer.
Prediction reproject_visibility(const VisibilityBitmap& received, const ViewProjection& old_view_projection,
                                const GBuffer& gbuffer, const Intrinsics& intr);

/// Stand-in visibility when no bitmap is usable.
Prediction missing_visibility(const GBuffer& gbuffer, int num_lights, MissingPolicy policy);

} // namespace dhr
