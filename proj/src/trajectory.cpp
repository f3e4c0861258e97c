#include "dhr/trajectory.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "dhr/error.hpp"

namespace dhr {

namespace {

Vec3 orthonormal_up(const Vec3& position, const Vec3& target, const Vec3& up)
{
    const Vec3 f = normalize(target - position);
    return normalize(up - f * dot(up, f));
}

} // namespace

Trajectory::Trajectory(std::vector<Keyframe> keyframes) : keyframes_(std::move(keyframes))
{
    if (keyframes_.empty()) throw ConfigError("trajectory needs at least one keyframe");
    for (std::size_t i = 0; i < keyframes_.size(); ++i) {
        const Keyframe& k = keyframes_[i];
        if (i > 0 && k.frame <= keyframes_[i - 1].frame) throw ConfigError("keyframe indices must strictly increase");
        const Vec3 view = k.target - k.position;
        if (!(length(view) > 0.0) || !(length(cross(normalize(view), normalize(k.up))) > 1e-6)) {
            throw ConfigError("keyframe " + std::to_string(k.frame) + ": up is parallel to the view direction");
        }
    }
}

Trajectory load_trajectory(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw LoadError(path.string() + ": cannot open");
    std::vector<Keyframe> keys;
    try {
        const auto j = nlohmann::json::parse(in);
        auto vec = [](const nlohmann::json& a) { return Vec3{a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()}; };
        for (const auto& k : j.at("keyframes")) {
            Keyframe kf;
            kf.frame = k.at("frame").get<FrameIndex>();
            kf.position = vec(k.at("position"));
            kf.target = vec(k.at("target"));
            if (k.contains("up")) kf.up = vec(k["up"]);
            keys.push_back(kf);
        }
    } catch (const nlohmann::json::exception& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
    try {
        return Trajectory(std::move(keys));
    } catch (const ConfigError& e) {
        throw LoadError(path.string() + ": " + e.what());
    }
}

CameraPose sample_trajectory(const Trajectory& trajectory, FrameIndex frame)
{
    const auto keys = trajectory.keyframes();
    if (frame < keys.front().frame) {
        throw RangeError("frame " + std::to_string(frame) + " precedes the first keyframe " +
                         std::to_string(keys.front().frame));
    }
    if (frame >= keys.back().frame) {
        const Keyframe& k = keys.back();
        return {k.position, k.target, orthonormal_up(k.position, k.target, k.up), frame};
    }
    const auto next = std::upper_bound(keys.begin(), keys.end(), frame,
                                       [](FrameIndex f, const Keyframe& k) { return f < k.frame; });
    const Keyframe& b = *next;
    const Keyframe& a = *(next - 1);
    if (frame == a.frame) return {a.position, a.target, orthonormal_up(a.position, a.target, a.up), frame};

    const double s = static_cast<double>(frame - a.frame) / static_cast<double>(b.frame - a.frame);
    const Vec3 position = a.position + (b.position - a.position) * s;
    const Vec3 target = a.target + (b.target - a.target) * s;
    Vec3 up = a.up + (b.up - a.up) * s;
    if (!(length(up) > 0.0)) up = a.up;
    const Vec3 view = target - position;
    if (!(length(view) > 0.0) || !(length(cross(normalize(view), normalize(up))) > 1e-6)) {
        throw MathError("interpolated pose at frame " + std::to_string(frame) + " is degenerate");
    }
    return {position, target, orthonormal_up(position, target, up), frame};
}

} // namespace dhr
