#include "uwbloc/mac_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

namespace uwbloc {

std::size_t MacConfig::slots_per_tag() const
{
  return static_cast<std::size_t>(std::llround(blink_rate * frame()));
}

std::size_t MacConfig::comb_count() const
{
  const std::size_t spt = slots_per_tag();
  return spt ? n_slots / spt : 0;
}

void MacConfig::validate() const
{
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("MAC config: ") + what); };
  if (n_tags < 1) fail("n_tags must be >= 1");
  if (!(slot_width > 0.0) || n_slots == 0) fail("slot width and count must be positive");
  if (!(blink_rate > 0.0)) fail("blink rate must be positive");
  const double spt = blink_rate * frame();
  if (std::abs(spt - std::round(spt)) > 1e-9 || slots_per_tag() == 0) {
    fail("blink rate times frame length must be a positive integer");
  }
  if (n_slots % slots_per_tag() != 0) fail("slots per tag must divide the slot count");
  if (!(blink_airtime > 0.0) || blink_airtime > slot_width) fail("airtime must lie in (0, slot_width]");
  if (!(sync_period > 0.0)) fail("sync period must be positive");
  if (!(clock_ppm >= 0.0)) fail("clock ppm must be non-negative");
  if (!(sim_duration > 0.0)) fail("duration must be positive");
  if (correction_threshold < 1) fail("correction threshold must be >= 1");
  if (!(correction_latency >= 0.0) || !(sync_jitter >= 0.0)) fail("latency and jitter must be >= 0");
  if (!(sync_loss_probability >= 0.0 && sync_loss_probability <= 1.0)) fail("sync loss must be in [0, 1]");
  if (!(window > 0.0)) fail("window must be positive");
  if (mode == MacMode::Tdma && static_cast<std::size_t>(n_tags) > n_slots) fail("more tags than slots");
  for (const auto& f : faults) {
    if (f.tag < 0 || f.tag >= n_tags) fail("fault references an unknown tag");
    if (f.comb >= comb_count()) fail("fault comb out of range");
  }
}

MacConfig MacConfig::from_json_text(const std::string& text)
{
  const auto j = nlohmann::json::parse(text);
  MacConfig c;
  c.n_tags = j.value("n_tags", c.n_tags);
  c.blink_rate = j.value("blink_rate", c.blink_rate);
  c.slot_width = j.value("slot_width", c.slot_width);
  c.n_slots = j.value("n_slots", c.n_slots);
  c.sync_period = j.value("sync_period", c.sync_period);
  c.clock_ppm = j.value("clock_ppm", c.clock_ppm);
  c.blink_airtime = j.value("blink_airtime", c.blink_airtime);
  c.sim_duration = j.value("sim_duration", c.sim_duration);
  const std::string mode = j.value("mode", std::string("tdma"));
  if (mode == "tdma") c.mode = MacMode::Tdma;
  else if (mode == "unslotted") c.mode = MacMode::Unslotted;
  else throw std::invalid_argument("MAC config: unknown mode " + mode);
  c.correction_threshold = j.value("correction_threshold", c.correction_threshold);
  c.correction_latency = j.value("correction_latency", c.correction_latency);
  c.sync_jitter = j.value("sync_jitter", c.sync_jitter);
  c.sync_loss_probability = j.value("sync_loss_probability", c.sync_loss_probability);
  c.drift_compensation = j.value("drift_compensation", c.drift_compensation);
  c.warm_start = j.value("warm_start", c.warm_start);
  c.window = j.value("window", c.window);
  if (j.contains("faults")) {
    for (const auto& f : j.at("faults")) {
      c.faults.push_back({ f.at("tag").get<int>(), f.at("time").get<double>(), f.at("comb").get<std::size_t>() });
    }
  }
  c.validate();
  return c;
}

double drift_offset(double ppm, double elapsed)
{
  return ppm * 1e-6 * elapsed;
}

GatewayState::GatewayState(std::size_t comb_count) : owner_(comb_count) {}

std::optional<std::size_t> GatewayState::assign_slot(int tag)
{
  if (auto c = comb_of(tag)) return c;
  for (std::size_t c = 0; c < owner_.size(); ++c) {
    if (!owner_[c]) {
      owner_[c] = tag;
      return c;
    }
  }
  return std::nullopt;
}

void GatewayState::release(int tag)
{
  for (auto& o : owner_) {
    if (o == tag) o.reset();
  }
  streaks_.erase(tag);
}

std::optional<std::size_t> GatewayState::comb_of(int tag) const
{
  for (std::size_t c = 0; c < owner_.size(); ++c) {
    if (owner_[c] == tag) return c;
  }
  return std::nullopt;
}

std::size_t GatewayState::free_count() const
{
  return static_cast<std::size_t>(std::count(owner_.begin(), owner_.end(), std::nullopt));
}

int GatewayState::streak(int tag) const
{
  const auto it = streaks_.find(tag);
  return it == streaks_.end() ? 0 : it->second;
}

std::optional<std::pair<std::size_t, std::size_t>> GatewayState::move_tag(int tag)
{
  const auto old = comb_of(tag);
  if (!old) return std::nullopt;
  for (std::size_t c = 0; c < owner_.size(); ++c) {
    if (!owner_[c]) {
      owner_[c] = tag;
      owner_[*old].reset();
      return std::make_pair(*old, c);
    }
  }
  return std::nullopt;
}

std::vector<SlotCorrection> detect_and_correct(GatewayState& state,
                                               const std::vector<CollisionEvent>& frame_events,
                                               const std::vector<int>& active_tags, int threshold,
                                               double now)
{
  std::map<int, std::set<int>> partners;
  for (const auto& e : frame_events) {
    partners[e.tag_a].insert(e.tag_b);
    partners[e.tag_b].insert(e.tag_a);
  }
  for (int tag : active_tags) {
    if (!partners.count(tag)) state.reset_streak(tag);
  }
  std::vector<int> triggered;
  for (const auto& [tag, _] : partners) {
    if (state.bump_streak(tag) >= threshold) triggered.push_back(tag);
  }

  std::vector<SlotCorrection> out;
  std::set<int> handled;
  for (int tag : triggered) {
    if (handled.count(tag)) continue;
    std::set<int> group = partners[tag];
    group.insert(tag);
    const int mover = *group.rbegin();
    for (int g : group) {
      state.reset_streak(g);
      handled.insert(g);
    }
    if (const auto moved = state.move_tag(mover)) {
      out.push_back({ now, mover, moved->first, moved->second });
    } else {
      spdlog::debug("no free slot to re-slot tag {} at t = {:.3f} s", mover, now);
    }
  }
  return out;
}

double MacReport::overall_success() const
{
  std::size_t sent = 0, delivered = 0;
  for (const auto& t : tags) {
    sent += t.sent;
    delivered += t.delivered;
  }
  return sent ? static_cast<double>(delivered) / static_cast<double>(sent) : 0.0;
}

double MacReport::mean_ratio() const
{
  double s = 0.0;
  std::size_t n = 0;
  for (const auto& t : tags) {
    if (!t.sent) continue;
    s += t.ratio();
    ++n;
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

double MacReport::min_ratio() const
{
  double m = 1.0;
  for (const auto& t : tags)
    if (t.sent) m = std::min(m, t.ratio());
  return m;
}

double MacReport::max_ratio() const
{
  double m = 0.0;
  for (const auto& t : tags)
    if (t.sent) m = std::max(m, t.ratio());
  return m;
}

namespace {

enum class EventKind
{
  Sync = 0,
  Correction = 1,
  Fault = 2,
  Frame = 3,
  Blink = 4,
};

struct Event
{
  double time;
  EventKind kind;
  std::uint64_t seq;
  int tag;
  std::uint64_t version;
  std::size_t comb;  // Correction / Fault payload

  bool operator>(const Event& o) const
  {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return kind > o.kind;
    return seq > o.seq;
  }
};

struct TagClock
{
  double rate_error{ 0.0 };    // true fractional frequency error
  double compensation{ 0.0 };  // fractional correction the tag applies
  double offset0{ 0.0 };       // local - global at t0
  double t0{ 0.0 };
  double last_sync{ 0.0 };

  double effective_rate() const { return rate_error - compensation; }
  double offset(double t) const { return offset0 + effective_rate() * (t - t0); }
  /// Global time at which the local clock reads `local`.
  double global_at(double local) const
  {
    const double e = effective_rate();
    return (local - offset0 + e * t0) / (1.0 + e);
  }
};

struct TagState
{
  bool active{ false };
  std::size_t comb{ 0 };
  TagClock clock;
  std::uint64_t next_index{ 0 };
  std::uint64_t version{ 0 };
  double phase{ 0.0 };   // unslotted
  double period{ 0.0 };  // unslotted, global seconds
};

struct Transmission
{
  double start;
  double end;
  int tag;
  bool collided;
};

class Simulator
{
public:
  Simulator(const MacConfig& config, RandomStream& rng) : cfg_(config), rng_(rng), gateway_(config.comb_count()) {}

  MacReport run();

private:
  double blink_time(const TagState& t, std::uint64_t k) const;
  void schedule_blink(int tag, double now);
  void push(double time, EventKind kind, int tag = -1, std::uint64_t version = 0, std::size_t comb = 0)
  {
    queue_.push({ time, kind, seq_++, tag, version, comb });
  }
  void transmit(int tag, double start);
  void finalize_until(double time);
  void finalize(const Transmission& tx);
  void on_sync(double now);
  void on_frame(double now);

  const MacConfig& cfg_;
  RandomStream& rng_;
  GatewayState gateway_;
  std::vector<TagState> tags_;
  MacReport report_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_{ 0 };
  std::vector<Transmission> pending_;
  std::vector<CollisionEvent> frame_events_;
  std::set<int> frame_active_;
  std::size_t n_windows_{ 0 };
};

double Simulator::blink_time(const TagState& t, std::uint64_t k) const
{
  if (cfg_.mode == MacMode::Unslotted) {
    return t.phase + static_cast<double>(k) * t.period;
  }
  const std::size_t spt = cfg_.slots_per_tag();
  const std::size_t stride = cfg_.comb_count();
  const double frame_start = static_cast<double>(k / spt) * cfg_.frame();
  const std::size_t slot = t.comb + (k % spt) * stride;
  const double local = frame_start + static_cast<double>(slot) * cfg_.slot_width +
                       0.5 * (cfg_.slot_width - cfg_.blink_airtime);
  return t.clock.global_at(local);
}

void Simulator::schedule_blink(int tag, double now)
{
  TagState& t = tags_[static_cast<std::size_t>(tag)];
  ++t.version;
  double when = blink_time(t, t.next_index);
  while (when < now) when = blink_time(t, ++t.next_index);
  if (when < cfg_.sim_duration) push(when, EventKind::Blink, tag, t.version);
}

void Simulator::finalize(const Transmission& tx)
{
  TagReport& r = report_.tags[static_cast<std::size_t>(tx.tag)];
  ++r.sent;
  if (tx.collided) ++r.collided;
  else ++r.delivered;
  const auto w = std::min(n_windows_ - 1, static_cast<std::size_t>(tx.start / cfg_.window));
  WindowReport& wr = report_.windows[w * tags_.size() + static_cast<std::size_t>(tx.tag)];
  ++wr.sent;
  if (!tx.collided) ++wr.delivered;
}

void Simulator::finalize_until(double time)
{
  // pending_ stays in start order; everything that ended by `time` can no longer collide.
  auto keep = std::stable_partition(pending_.begin(), pending_.end(),
                                    [&](const Transmission& tx) { return tx.end > time; });
  std::vector<Transmission> done(keep, pending_.end());
  pending_.erase(keep, pending_.end());
  std::sort(done.begin(), done.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  for (const auto& tx : done) finalize(tx);
}

void Simulator::transmit(int tag, double start)
{
  finalize_until(start);
  Transmission tx{ start, start + cfg_.blink_airtime, tag, false };
  for (auto& other : pending_) {
    // Every pending transmission ends after `start`, so it overlaps.
    other.collided = true;
    tx.collided = true;
    report_.collisions.push_back({ start, other.tag, tag });
    frame_events_.push_back({ start, other.tag, tag });
  }
  pending_.push_back(tx);
  frame_active_.insert(tag);

  TagState& t = tags_[static_cast<std::size_t>(tag)];
  if (cfg_.mode == MacMode::Tdma) {
    auto& err = report_.tags[static_cast<std::size_t>(tag)].max_slot_error;
    err = std::max(err, std::abs(t.clock.offset(start)));
  }
  ++t.next_index;
  schedule_blink(tag, start);
}

void Simulator::on_sync(double now)
{
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    TagState& t = tags_[i];
    if (!t.active) continue;
    const bool lost = rng_.bernoulli(cfg_.sync_loss_probability);
    const double eps = rng_.normal(cfg_.sync_jitter);
    if (lost) continue;
    const double observed = t.clock.offset(now) - eps;
    if (cfg_.drift_compensation && now > t.clock.last_sync) {
      t.clock.compensation += observed / (now - t.clock.last_sync);
    }
    t.clock.offset0 = eps;
    t.clock.t0 = now;
    t.clock.last_sync = now;
    schedule_blink(static_cast<int>(i), now);
  }
  const double next = now + cfg_.sync_period;
  if (next < cfg_.sim_duration) push(next, EventKind::Sync);
}

void Simulator::on_frame(double now)
{
  std::vector<int> active(frame_active_.begin(), frame_active_.end());
  auto decided = detect_and_correct(gateway_, frame_events_, active, cfg_.correction_threshold, now);
  for (const auto& c : decided) {
    report_.corrections.push_back(c);
    push(now + cfg_.correction_latency, EventKind::Correction, c.tag, 0, c.new_comb);
  }
  frame_events_.clear();
  frame_active_.clear();
  const double next = now + cfg_.frame();
  if (next < cfg_.sim_duration) push(next, EventKind::Frame);
}

MacReport Simulator::run()
{
  const auto n = static_cast<std::size_t>(cfg_.n_tags);
  tags_.resize(n);
  report_.tags.resize(n);
  n_windows_ = static_cast<std::size_t>(std::ceil(cfg_.sim_duration / cfg_.window - 1e-9));
  n_windows_ = std::max<std::size_t>(n_windows_, 1);
  report_.windows.resize(n_windows_ * n);
  for (std::size_t w = 0; w < n_windows_; ++w) {
    for (std::size_t i = 0; i < n; ++i) {
      report_.windows[w * n + i].window_start = static_cast<double>(w) * cfg_.window;
      report_.windows[w * n + i].tag = static_cast<int>(i);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    TagState& t = tags_[i];
    TagReport& r = report_.tags[i];
    r.tag = static_cast<int>(i);
    r.ppm = rng_.uniform(-cfg_.clock_ppm, cfg_.clock_ppm);
    t.clock.rate_error = r.ppm * 1e-6;
    if (cfg_.mode == MacMode::Unslotted) {
      t.active = true;
      t.period = (1.0 / cfg_.blink_rate) / (1.0 + t.clock.rate_error);
      t.phase = rng_.uniform(0.0, 1.0 / cfg_.blink_rate);
      continue;
    }
    const auto comb = gateway_.assign_slot(r.tag);
    const double eps_prev = rng_.normal(cfg_.sync_jitter);
    const double eps = rng_.normal(cfg_.sync_jitter);
    if (!comb) {
      report_.rejected.push_back(r.tag);
      continue;
    }
    t.active = true;
    t.comb = *comb;
    r.comb = comb;
    t.clock.offset0 = eps;
    if (cfg_.warm_start && cfg_.drift_compensation) {
      // As if the previous sync was one period ago: residual rate error from the two jitters.
      t.clock.compensation = t.clock.rate_error - (eps - eps_prev) / cfg_.sync_period;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (tags_[i].active) schedule_blink(static_cast<int>(i), 0.0);
  }
  if (cfg_.mode == MacMode::Tdma) {
    push(cfg_.sync_period, EventKind::Sync);
    push(cfg_.frame(), EventKind::Frame);
    for (const auto& f : cfg_.faults) push(f.time, EventKind::Fault, f.tag, 0, f.comb);
  }

  while (!queue_.empty()) {
    const Event e = queue_.top();
    queue_.pop();
    if (e.time >= cfg_.sim_duration) break;
    switch (e.kind) {
    case EventKind::Sync: on_sync(e.time); break;
    case EventKind::Frame: on_frame(e.time); break;
    case EventKind::Correction:
    case EventKind::Fault: {
      TagState& t = tags_[static_cast<std::size_t>(e.tag)];
      if (!t.active) break;
      t.comb = e.comb;
      report_.tags[static_cast<std::size_t>(e.tag)].comb = e.comb;
      schedule_blink(e.tag, e.time);
      break;
    }
    case EventKind::Blink:
      if (e.version == tags_[static_cast<std::size_t>(e.tag)].version) transmit(e.tag, e.time);
      break;
    }
  }
  finalize_until(std::numeric_limits<double>::infinity());
  return std::move(report_);
}

}  // namespace

MacReport run_mac(const MacConfig& config, RandomStream& rng)
{
  config.validate();
  return Simulator(config, rng).run();
}

std::string mac_report_csv(const MacReport& report)
{
  std::string out = "tag_id,sent,delivered,ratio\n";
  for (const auto& t : report.tags) {
    out += fmt::format("{},{},{},{:.10g}\n", t.tag, t.sent, t.delivered, t.ratio());
  }
  return out;
}

std::string mac_timeseries_csv(const MacReport& report)
{
  std::string out = "window_start_s,tag_id,ratio\n";
  for (const auto& w : report.windows) {
    if (!w.sent) continue;
    out += fmt::format("{:.10g},{},{:.10g}\n", w.window_start, w.tag, w.ratio());
  }
  return out;
}

}  // namespace uwbloc
