#include <ldinav/dataset_io.hpp>
#include <ldinav/service.hpp>

#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <map>
#include <set>
#include <stdexcept>
#include <thread>

namespace ldinav {

struct SegmentCache::Entry {
  std::once_flag encodeOnce;
  std::once_flag decodeOnce;
  EncodedSegment encoded;
  ExtendedLdi decoded;
  std::atomic<std::size_t> encodes{0};
  std::atomic<std::size_t> accesses{0};
};

SegmentCache::SegmentCache(MultiviewDataset dataset, NavigationDomain domain,
                           SegmentSettings settings)
    : m_dataset{std::move(dataset)}, m_domain{std::move(domain)}, m_settings{settings} {
  for (std::size_t i = 0; i < m_domain.segments.size(); ++i) {
    m_entries.push_back(std::make_unique<Entry>());
  }
}

SegmentCache::~SegmentCache() = default;

auto SegmentCache::entry(int id) -> Entry & {
  if (id < 0 || static_cast<std::size_t>(id) >= m_entries.size()) {
    throw std::out_of_range{"unknown segment " + std::to_string(id)};
  }
  return *m_entries[static_cast<std::size_t>(id)];
}

auto SegmentCache::entry(int id) const -> const Entry & {
  return const_cast<SegmentCache *>(this)->entry(id);
}

auto SegmentCache::encoded(int id) -> const EncodedSegment & {
  auto &e = entry(id);
  ++e.accesses;
  std::call_once(e.encodeOnce, [&] {
    const auto &seg = m_domain.segments[static_cast<std::size_t>(id)];
    const auto views = segment_dataset(m_dataset, seg);
    const auto built = build_extended_ldi(views, seg.reference_slot(), m_settings.build);
    e.encoded = encode_segment(built.ldi, m_settings.quality, m_settings.preprocess);
    ++e.encodes;
  });
  return e.encoded;
}

auto SegmentCache::decoded(int id) -> const ExtendedLdi & {
  const auto &enc = encoded(id);
  auto &e = entry(id);
  std::call_once(e.decodeOnce, [&] { e.decoded = decode_segment(enc); });
  return e.decoded;
}

auto SegmentCache::encode_count(int id) const -> std::size_t { return entry(id).encodes; }
auto SegmentCache::access_count(int id) const -> std::size_t { return entry(id).accesses; }

auto render_pose(SegmentCache &cache, double pose) -> PoseRender {
  const int id = select_segment(cache.domain(), pose);
  const auto camera = camera_at_pose(cache.domain().path, pose);
  const auto &ldi = cache.decoded(id);
  return {id, hole_fill(render_view(ldi, camera, cache.settings().render))};
}

auto render_pose_png(SegmentCache &cache, double pose) -> std::vector<std::uint8_t> {
  return encode_png(to_rgb(render_pose(cache, pose).view.image));
}

namespace {
struct Session {
  std::set<int> fetched;
  SessionStats stats;
};

auto parse_double(const std::string &text) -> std::optional<double> {
  double value = 0.0;
  const auto *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    return std::nullopt;
  }
  return value;
}
} // namespace

struct NavigationService::Impl {
  explicit Impl(SegmentCache &c) : cache{c} {}

  SegmentCache &cache;
  httplib::Server server;
  std::thread thread;
  mutable std::mutex sessionsMutex;
  std::map<std::string, Session> sessions;

  void routes() {
    server.Get("/segments", [this](const httplib::Request &, httplib::Response &res) {
      auto list = nlohmann::json::array();
      for (const auto &seg : cache.domain().segments) {
        list.push_back({{"id", seg.id},
                        {"pose_range", {seg.pose_begin, seg.pose_end}},
                        {"byte_size", cache.encoded(seg.id).bytes.size()}});
      }
      res.set_content(list.dump(), "application/json");
    });

    server.Get(R"(/segment/(\d+))", [this](const httplib::Request &req, httplib::Response &res) {
      const int id = std::stoi(req.matches[1]);
      if (id >= static_cast<int>(cache.domain().segments.size())) {
        res.status = 404;
        res.set_content("unknown segment", "text/plain");
        return;
      }
      const auto &bytes = cache.encoded(id).bytes;
      res.set_content(reinterpret_cast<const char *>(bytes.data()), bytes.size(),
                      "application/octet-stream");
    });

    server.Get("/render", [this](const httplib::Request &req, httplib::Response &res) {
      const auto pose = parse_double(req.get_param_value("pose"));
      if (!pose || !(*pose >= cache.domain().pose_min() && *pose <= cache.domain().pose_max())) {
        res.status = 400;
        res.set_content("pose missing or outside the navigation domain", "text/plain");
        return;
      }
      const std::string session = req.has_param("session") ? req.get_param_value("session") : "";
      const auto frame = render_pose(cache, *pose);
      const auto png = encode_png(to_rgb(frame.view.image));
      const auto segmentBytes = cache.encoded(frame.segment).bytes.size();
      {
        std::lock_guard lock{sessionsMutex};
        auto &s = sessions[session];
        ++s.stats.render_requests;
        if (s.fetched.insert(frame.segment).second) {
          ++s.stats.segment_fetches;
          s.stats.bytes_transferred += segmentBytes;
        }
      }
      res.set_header("X-Segment-Id", std::to_string(frame.segment));
      res.set_content(reinterpret_cast<const char *>(png.data()), png.size(), "image/png");
    });

    server.Get("/stats", [this](const httplib::Request &req, httplib::Response &res) {
      const std::string session = req.has_param("session") ? req.get_param_value("session") : "";
      const auto s = stats(session);
      const nlohmann::json body{{"session", session},
                                {"segment_fetches", s.segment_fetches},
                                {"bytes_transferred", s.bytes_transferred},
                                {"render_requests", s.render_requests}};
      res.set_content(body.dump(), "application/json");
    });
  }

  [[nodiscard]] auto stats(const std::string &session) const -> SessionStats {
    std::lock_guard lock{sessionsMutex};
    const auto it = sessions.find(session);
    return it == sessions.end() ? SessionStats{} : it->second.stats;
  }

  auto bind(const std::string &host, int port) -> int {
    routes();
    // SO_REUSEADDR only: the library default SO_REUSEPORT would let a second server share an
    // occupied port instead of failing to bind.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    });
    const int bound = port == 0 ? server.bind_to_any_port(host)
                                : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) {
      throw std::runtime_error{"cannot bind " + host + ":" + std::to_string(port)};
    }
    return bound;
  }
};

NavigationService::NavigationService(SegmentCache &cache) : m_impl{std::make_unique<Impl>(cache)} {}

NavigationService::~NavigationService() { stop(); }

auto NavigationService::start(const std::string &host, int port) -> int {
  const int bound = m_impl->bind(host, port);
  m_impl->thread = std::thread{[this] { m_impl->server.listen_after_bind(); }};
  m_impl->server.wait_until_ready();
  return bound;
}

void NavigationService::run(const std::string &host, int port) {
  m_impl->bind(host, port);
  m_impl->server.listen_after_bind();
}

void NavigationService::stop() {
  m_impl->server.stop();
  if (m_impl->thread.joinable()) {
    m_impl->thread.join();
  }
}

auto NavigationService::stats(const std::string &session) const -> SessionStats {
  return m_impl->stats(session);
}

} // namespace ldinav
