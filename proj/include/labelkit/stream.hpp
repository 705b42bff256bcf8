#pragma once

#include "labelkit/pipeline.hpp"
#include "labelkit/scene.hpp"

#include <json.hpp>

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace labelkit {

inline constexpr unsigned short kDefaultStreamPort = 7788;
inline constexpr std::size_t kMaxBufferedFrames = 8;

// Protocol state of one client, independent of the transport. Messages are
// single JSON objects; see README for the schema.
class SessionCore {
public:
    explicit SessionCore(std::shared_ptr<const Scene> scene, double fps = 30.0);

    nlohmann::json hello() const;

    // Parses and applies one client message. Returns the replies to send
    // right away (error or pong); poses take effect on the next frame.
    std::vector<nlohmann::json> handle_message(std::string_view text);

    // Applies the newest pending pose, if any, and renders a frame at t_now.
    nlohmann::json next_frame(double t_now);

    const DevicePose& pose() const { return pose_; }
    std::size_t poses_received() const { return poses_received_; }
    std::size_t poses_applied() const { return poses_applied_; }
    const LabelEngine& engine() const { return engine_; }

private:
    std::vector<nlohmann::json> handle_pose(const nlohmann::json& msg);
    std::vector<nlohmann::json> handle_config(const nlohmann::json& msg);

    std::shared_ptr<const Scene> scene_;
    double fps_;
    LabelEngine engine_;
    DevicePose pose_;
    std::optional<DevicePose> pending_;
    std::optional<double> last_t_;
    std::size_t poses_received_ = 0;
    std::size_t poses_applied_ = 0;
};

nlohmann::json error_message(std::string_view text);

// Bounded FIFO of serialized messages. Pushing onto a full queue drops the
// oldest frame; control messages (hello, error, pong) are never dropped.
class OutboundQueue {
public:
    explicit OutboundQueue(std::size_t max_frames = kMaxBufferedFrames) : max_frames_(max_frames) {}

    void push_frame(std::string message);
    void push_control(std::string message);
    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    std::size_t frames() const { return frames_; }
    std::size_t dropped() const { return dropped_; }
    const std::string& front() const { return items_.front().text; }
    void pop();

private:
    struct Item {
        std::string text;
        bool frame;
    };
    std::deque<Item> items_;
    std::size_t max_frames_;
    std::size_t frames_ = 0;
    std::size_t dropped_ = 0;
};

struct StreamConfig {
    std::string address = "127.0.0.1";
    // Line-delimited JSON over TCP. 0 picks a free port.
    unsigned short port = kDefaultStreamPort;
    // Same payloads as WebSocket text frames. 0 picks a free port; unset
    // disables the WebSocket listener.
    std::optional<unsigned short> ws_port = static_cast<unsigned short>(kDefaultStreamPort + 1);
    double fps = 30.0;
};

class StreamServer {
public:
    StreamServer(std::shared_ptr<const Scene> scene, StreamConfig config);
    ~StreamServer();
    StreamServer(const StreamServer&) = delete;
    StreamServer& operator=(const StreamServer&) = delete;

    // Binds both listeners and starts serving on a background thread.
    // Throws LabelError when a port cannot be bound.
    void start();
    void stop();
    // Blocks until stop() is called or SIGINT/SIGTERM arrives.
    void wait();

    unsigned short tcp_port() const;
    std::optional<unsigned short> ws_port() const;
    std::size_t active_sessions() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace labelkit
