#include "labelkit/stream.hpp"

#include "labelkit/coherence.hpp"
#include "labelkit/scene_io.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

namespace labelkit {

using nlohmann::json;

json error_message(std::string_view text)
{
    return json{{"type", "error"}, {"schema", kSchemaVersion}, {"message", text}};
}

SessionCore::SessionCore(std::shared_ptr<const Scene> scene, double fps)
    : scene_(std::move(scene)), fps_(fps), engine_(scene_)
{
    if (!(fps_ >= 1.0 && fps_ <= 240.0)) throw LabelError("fps must lie in [1, 240]");
    pose_.position = scene_->default_position;
    pose_.yaw_deg = scene_->default_yaw_deg;
    pose_.pitch_deg = scene_->default_pitch_deg;
}

json SessionCore::hello() const
{
    const Scene& s = engine_.scene();
    return json{{"type", "hello"},
                {"schema", kSchemaVersion},
                {"fps", fps_},
                {"pose", pose_to_json(pose_)},
                {"scene",
                 {{"pois", s.pois.size()},
                  {"groups", s.groups.size()},
                  {"thresholds", {{"t_deg", s.thresholds.t_deg}, {"m1_deg", s.thresholds.m1_deg}, {"m2_deg", s.thresholds.m2_deg}}},
                  {"easing", easing_name(engine_.easing())},
                  {"transition_duration_s", s.transition_duration_s}}}};
}

std::vector<json> SessionCore::handle_message(std::string_view text)
{
    json msg;
    try {
        msg = json::parse(text);
    } catch (const json::exception& e) {
        return {error_message(std::string("malformed message: ") + e.what())};
    }
    if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
        return {error_message("message must be an object with a string \"type\"")};

    const std::string type = msg["type"].get<std::string>();
    try {
        if (type == "pose") return handle_pose(msg);
        if (type == "config") return handle_config(msg);
        if (type == "ping") {
            json pong{{"type", "pong"}, {"schema", kSchemaVersion}};
            if (msg.contains("id")) pong["id"] = msg["id"];
            return {pong};
        }
    } catch (const json::exception& e) {
        return {error_message("bad " + type + " message: " + e.what())};
    } catch (const LabelError& e) {
        return {error_message("bad " + type + " message: " + e.what())};
    }
    return {error_message("unknown message type '" + type + "'")};
}

std::vector<json> SessionCore::handle_pose(const json& msg)
{
    const DevicePose pose = pose_from_json(msg.at("pose"));
    if (!pose.finite()) return {error_message("non-finite pose ignored")};
    pending_ = pose;
    ++poses_received_;
    return {};
}

std::vector<json> SessionCore::handle_config(const json& msg)
{
    // Validate everything first so a rejected message changes nothing.
    LodThresholds thresholds = engine_.scene().thresholds;
    if (msg.contains("thresholds")) {
        const json& t = msg["thresholds"];
        if (t.contains("t_deg")) thresholds.t_deg = t["t_deg"].get<double>();
        if (t.contains("m1_deg")) thresholds.m1_deg = t["m1_deg"].get<double>();
        if (t.contains("m2_deg")) thresholds.m2_deg = t["m2_deg"].get<double>();
        if (!thresholds.valid()) return {error_message("thresholds must satisfy 0 < m1 < m2 <= t")};
    }
    std::optional<EasingKind> easing;
    if (msg.contains("easing")) {
        easing = easing_from_name(msg["easing"].get<std::string>());
        if (!easing) return {error_message("unknown easing '" + msg["easing"].get<std::string>() + "'")};
    }
    std::optional<double> duration;
    if (msg.contains("transition_duration_s")) {
        duration = msg["transition_duration_s"].get<double>();
        if (!(*duration > 0.0) || !std::isfinite(*duration)) return {error_message("transition_duration_s must be positive")};
    }
    std::vector<std::pair<std::string, double>> scalars;
    if (msg.contains("scalars")) {
        for (const auto& [id, value] : msg["scalars"].items()) {
            const double v = value.get<double>();
            if (!engine_.scene().find_poi(id)) return {error_message("unknown POI '" + id + "'")};
            if (!std::isfinite(v)) return {error_message("scalar for '" + id + "' must be finite")};
            scalars.emplace_back(id, v);
        }
    }

    if (msg.contains("thresholds")) engine_.set_thresholds(thresholds);
    if (easing) engine_.set_easing(*easing);
    if (duration) engine_.set_transition_duration(*duration);
    for (const auto& [id, v] : scalars) engine_.set_scalar(id, v);
    return {};
}

json SessionCore::next_frame(double t_now)
{
    if (last_t_ && !(t_now > *last_t_)) t_now = std::nextafter(*last_t_, INFINITY);
    last_t_ = t_now;
    if (pending_) {
        pose_ = *pending_;
        pending_.reset();
        ++poses_applied_;
    }
    return json{{"type", "frame"}, {"schema", kSchemaVersion}, {"snapshot", snapshot_to_json(engine_.update_frame(pose_, t_now))}};
}

void OutboundQueue::push_frame(std::string message)
{
    if (frames_ >= max_frames_) {
        for (auto it = items_.begin(); it != items_.end(); ++it) {
            if (it->frame) {
                items_.erase(it);
                --frames_;
                ++dropped_;
                break;
            }
        }
    }
    items_.push_back({std::move(message), true});
    ++frames_;
}

void OutboundQueue::push_control(std::string message) { items_.push_back({std::move(message), false}); }

void OutboundQueue::pop()
{
    if (items_.front().frame) --frames_;
    items_.pop_front();
}

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

namespace {

constexpr std::size_t kMaxMessageBytes = 1 << 20;

class Session : public std::enable_shared_from_this<Session> {
public:
    Session(asio::any_io_executor executor, std::shared_ptr<const Scene> scene, double fps, std::atomic<std::size_t>& live)
        : timer_(executor), core_(std::move(scene), fps), period_(std::chrono::duration_cast<Clock::duration>(
                                                               std::chrono::duration<double>(1.0 / fps))),
          live_(live)
    {
        ++live_;
    }
    virtual ~Session() { --live_; }

protected:
    using Clock = std::chrono::steady_clock;

    // Runs on the session's strand once the transport is ready.
    void begin()
    {
        started_ = Clock::now();
        next_tick_ = started_;
        queue_.push_control(core_.hello().dump());
        flush();
        tick();
        read_next();
    }

    void on_text(std::string_view text)
    {
        for (const json& reply : core_.handle_message(text)) queue_.push_control(reply.dump());
        flush();
    }

    void on_written(beast::error_code ec)
    {
        writing_ = false;
        if (ec) return shutdown("write failed: " + ec.message());
        flush();
    }

    void shutdown(const std::string& why)
    {
        if (closed_) return;
        closed_ = true;
        spdlog::info("session closed ({}); {} frames dropped", why, queue_.dropped());
        timer_.cancel();
        close_transport();
    }

    virtual void read_next() = 0;
    virtual void write(const std::string& text) = 0;
    virtual void close_transport() = 0;

    std::string in_flight_;
    bool closed_ = false;

private:
    void tick()
    {
        if (closed_) return;
        const double t = std::chrono::duration<double>(Clock::now() - started_).count();
        try {
            queue_.push_frame(core_.next_frame(t).dump());
        } catch (const LabelError& e) {
            queue_.push_control(error_message(e.what()).dump());
        }
        flush();

        next_tick_ += period_;
        const auto now = Clock::now();
        if (next_tick_ < now) next_tick_ = now + period_;
        timer_.expires_at(next_tick_);
        timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
            if (!ec) self->tick();
        });
    }

    void flush()
    {
        if (writing_ || closed_ || queue_.empty()) return;
        writing_ = true;
        in_flight_ = queue_.front();
        queue_.pop();
        write(in_flight_);
    }

    asio::steady_timer timer_;
    SessionCore core_;
    OutboundQueue queue_;
    Clock::duration period_;
    Clock::time_point started_;
    Clock::time_point next_tick_;
    bool writing_ = false;
    std::atomic<std::size_t>& live_;
};

class TcpSession final : public Session {
public:
    TcpSession(tcp::socket socket, std::shared_ptr<const Scene> scene, double fps, std::atomic<std::size_t>& live)
        : Session(socket.get_executor(), std::move(scene), fps, live), socket_(std::move(socket))
    {
    }

    void run()
    {
        asio::dispatch(socket_.get_executor(), [self = std::static_pointer_cast<TcpSession>(shared_from_this())] { self->begin(); });
    }

private:
    void read_next() override
    {
        asio::async_read_until(socket_, asio::dynamic_buffer(buffer_, kMaxMessageBytes), '\n',
                               [self = std::static_pointer_cast<TcpSession>(shared_from_this())](beast::error_code ec,
                                                                                               std::size_t n) {
                                   if (ec) return self->shutdown(ec == asio::error::eof ? "client left" : ec.message());
                                   std::string line = self->buffer_.substr(0, n - 1);
                                   self->buffer_.erase(0, n);
                                   if (!line.empty() && line.back() == '\r') line.pop_back();
                                   if (!line.empty()) self->on_text(line);
                                   self->read_next();
                               });
    }

    void write(const std::string& text) override
    {
        in_flight_ = text + '\n';
        asio::async_write(socket_, asio::buffer(in_flight_),
                          [self = shared_from_this(), this](beast::error_code ec, std::size_t) { on_written(ec); });
    }

    void close_transport() override
    {
        beast::error_code ignored;
        socket_.shutdown(tcp::socket::shutdown_both, ignored);
        socket_.close(ignored);
    }

    tcp::socket socket_;
    std::string buffer_;
};

class WsSession final : public Session {
public:
    WsSession(tcp::socket socket, std::shared_ptr<const Scene> scene, double fps, std::atomic<std::size_t>& live)
        : Session(socket.get_executor(), std::move(scene), fps, live), ws_(std::move(socket))
    {
        ws_.read_message_max(kMaxMessageBytes);
    }

    void run()
    {
        asio::dispatch(ws_.get_executor(), [self = std::static_pointer_cast<WsSession>(shared_from_this())] {
            self->ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
            self->ws_.async_accept([self](beast::error_code ec) {
                if (ec) {
                    spdlog::warn("websocket handshake failed: {}", ec.message());
                    self->closed_ = true;
                    return;
                }
                self->ws_.text(true);
                self->begin();
            });
        });
    }

private:
    void read_next() override
    {
        ws_.async_read(buffer_, [self = std::static_pointer_cast<WsSession>(shared_from_this())](beast::error_code ec, std::size_t) {
            if (ec) return self->shutdown(ec == websocket::error::closed ? "client left" : ec.message());
            const std::string text = beast::buffers_to_string(self->buffer_.data());
            self->buffer_.consume(self->buffer_.size());
            self->on_text(text);
            self->read_next();
        });
    }

    void write(const std::string& text) override
    {
        in_flight_ = text;
        ws_.async_write(asio::buffer(in_flight_), [self = shared_from_this(), this](beast::error_code ec, std::size_t) { on_written(ec); });
    }

    void close_transport() override
    {
        beast::error_code ignored;
        beast::get_lowest_layer(ws_).socket().shutdown(tcp::socket::shutdown_both, ignored);
        beast::get_lowest_layer(ws_).socket().close(ignored);
    }

    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
};

} // namespace

struct StreamServer::Impl {
    std::shared_ptr<const Scene> scene;
    StreamConfig config;
    asio::io_context io;
    tcp::acceptor tcp_acceptor{io};
    std::optional<tcp::acceptor> ws_acceptor;
    std::thread thread;
    std::atomic<std::size_t> live{0};
    std::atomic<bool> running{false};

    void open(tcp::acceptor& acceptor, unsigned short port)
    {
        beast::error_code ec;
        const tcp::endpoint endpoint(asio::ip::make_address(config.address, ec), port);
        if (ec) throw LabelError("bad listen address '" + config.address + "'");
        acceptor.open(endpoint.protocol(), ec);
        if (!ec) acceptor.set_option(asio::socket_base::reuse_address(true), ec);
        if (!ec) acceptor.bind(endpoint, ec);
        if (!ec) acceptor.listen(asio::socket_base::max_listen_connections, ec);
        if (ec) throw LabelError("cannot listen on " + config.address + ":" + std::to_string(port) + ": " + ec.message());
    }

    template <typename SessionT>
    void accept(tcp::acceptor& acceptor)
    {
        acceptor.async_accept(asio::make_strand(io), [this, &acceptor](beast::error_code ec, tcp::socket socket) {
            if (ec == asio::error::operation_aborted) return;
            if (!ec) {
                spdlog::info("session opened from {}", socket.remote_endpoint(ec).address().to_string());
                std::make_shared<SessionT>(std::move(socket), scene, config.fps, live)->run();
            }
            accept<SessionT>(acceptor);
        });
    }
};

StreamServer::StreamServer(std::shared_ptr<const Scene> scene, StreamConfig config) : impl_(std::make_unique<Impl>())
{
    if (!(config.fps >= 1.0 && config.fps <= 240.0)) throw LabelError("fps must lie in [1, 240]");
    if (!validate_scene(*scene).empty()) throw LabelError("cannot serve an invalid scene");
    impl_->scene = std::move(scene);
    impl_->config = std::move(config);
}

StreamServer::~StreamServer() { stop(); }

void StreamServer::start()
{
    Impl& m = *impl_;
    m.open(m.tcp_acceptor, m.config.port);
    if (m.config.ws_port) {
        m.ws_acceptor.emplace(m.io);
        m.open(*m.ws_acceptor, *m.config.ws_port);
    }
    m.accept<TcpSession>(m.tcp_acceptor);
    if (m.ws_acceptor) m.accept<WsSession>(*m.ws_acceptor);
    m.running = true;
    m.thread = std::thread([&m] { m.io.run(); });
    spdlog::info("streaming on tcp {}{}", tcp_port(), ws_port() ? " and ws " + std::to_string(*ws_port()) : std::string());
}

void StreamServer::stop()
{
    if (!impl_ || !impl_->running.exchange(false)) return;
    impl_->io.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

void StreamServer::wait()
{
    asio::signal_set signals(impl_->io, SIGINT, SIGTERM);
    signals.async_wait([this](beast::error_code ec, int) {
        if (!ec) impl_->io.stop();
    });
    if (impl_->thread.joinable()) impl_->thread.join();
    impl_->running = false;
}

unsigned short StreamServer::tcp_port() const { return impl_->tcp_acceptor.local_endpoint().port(); }

std::optional<unsigned short> StreamServer::ws_port() const
{
    if (!impl_->ws_acceptor) return std::nullopt;
    return impl_->ws_acceptor->local_endpoint().port();
}

std::size_t StreamServer::active_sessions() const { return impl_->live.load(); }

} // namespace labelkit
