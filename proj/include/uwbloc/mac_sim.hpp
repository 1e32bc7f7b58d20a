#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "uwbloc/random.hpp"

namespace uwbloc {

enum class MacMode
{
  Tdma,
  Unslotted,
};

/// Forces a tag to transmit in `comb` from `time` on, without telling the gateway.
struct SlotFault
{
  int tag{ 0 };
  double time{ 0.0 };      // s
  std::size_t comb{ 0 };
};

struct MacConfig
{
  int n_tags{ 10 };
  double blink_rate{ 100.0 };       // Hz per tag
  double slot_width{ 1e-3 };        // s
  std::size_t n_slots{ 1000 };
  double sync_period{ 100.0 };      // s
  double clock_ppm{ 5.0 };          // per-tag drift drawn uniformly in [-ppm, +ppm]
  double blink_airtime{ 200e-6 };   // s
  double sim_duration{ 1800.0 };    // s
  MacMode mode{ MacMode::Tdma };
  int correction_threshold{ 5 };    // consecutive colliding frames before a re-slot
  double correction_latency{ 0.05 };  // s, side-channel delivery of a correction
  double sync_jitter{ 1e-6 };       // s, timestamp error of a received sync
  double sync_loss_probability{ 0.0 };
  /// Tags also correct their clock rate from successive syncs, not only the offset.
  bool drift_compensation{ true };
  /// Tags start already synchronized (offset and rate) instead of joining cold at t = 0.
  bool warm_start{ true };
  double window{ 10.0 };            // s, time-series window
  std::vector<SlotFault> faults;

  double frame() const { return slot_width * static_cast<double>(n_slots); }
  /// Slots each tag owns per frame.
  std::size_t slots_per_tag() const;
  /// Distinct evenly spaced slot sets ("combs"), i.e. the TDMA tag capacity.
  std::size_t comb_count() const;

  /// Throws std::invalid_argument for an inconsistent configuration.
  void validate() const;

  /// Parses a JSON object; absent keys keep their defaults. mode is "tdma" or "unslotted".
  static MacConfig from_json_text(const std::string& text);
};

/// Clock offset accumulated by a free-running clock: ppm * 1e-6 * elapsed.
double drift_offset(double ppm, double elapsed);

/// Slot table kept by the gateway. A tag owns comb c, i.e. slots c, c + stride, c + 2 stride, ...
class GatewayState
{
public:
  explicit GatewayState(std::size_t comb_count);

  /// Lowest free comb, recorded for `tag`; nullopt (onboarding rejected) when the table is full.
  std::optional<std::size_t> assign_slot(int tag);
  void release(int tag);
  /// Moves `tag` to the lowest free comb other than its own; returns (old, new) or nullopt
  /// when the tag is unknown or no comb is free.
  std::optional<std::pair<std::size_t, std::size_t>> move_tag(int tag);
  std::optional<std::size_t> comb_of(int tag) const;
  std::size_t comb_count() const { return owner_.size(); }
  std::size_t free_count() const;

  /// Consecutive colliding frames seen for `tag`.
  int streak(int tag) const;
  int bump_streak(int tag) { return ++streaks_[tag]; }
  void reset_streak(int tag) { streaks_.erase(tag); }

private:
  std::vector<std::optional<int>> owner_;
  std::map<int, int> streaks_;
};

/// Two blinks whose airtime overlapped; `time` is the later blink's start.
struct CollisionEvent
{
  double time{ 0.0 };
  int tag_a{ 0 };
  int tag_b{ 0 };
};

struct SlotCorrection
{
  double time{ 0.0 };  // when the gateway decided
  int tag{ 0 };
  std::size_t old_comb{ 0 };
  std::size_t new_comb{ 0 };
};

/// One frame of gateway bookkeeping. `frame_events` are the collisions seen during the frame
/// and `active_tags` the tags that transmitted in it. A tag in a collision this frame extends
/// its streak, any other active tag resets it. When a streak reaches `threshold`, the highest
/// tag id of that collision group is moved to the lowest free comb and the group's streaks
/// restart. Returns the corrections decided at `now`.
std::vector<SlotCorrection> detect_and_correct(GatewayState& state,
                                               const std::vector<CollisionEvent>& frame_events,
                                               const std::vector<int>& active_tags, int threshold,
                                               double now);

struct TagReport
{
  int tag{ 0 };
  std::optional<std::size_t> comb;  // nullopt: rejected at onboarding or unslotted
  double ppm{ 0.0 };
  std::size_t sent{ 0 };
  std::size_t delivered{ 0 };
  std::size_t collided{ 0 };
  double max_slot_error{ 0.0 };  // s, largest |clock offset| seen at a blink

  double ratio() const { return sent ? static_cast<double>(delivered) / static_cast<double>(sent) : 0.0; }
};

struct WindowReport
{
  double window_start{ 0.0 };
  int tag{ 0 };
  std::size_t sent{ 0 };
  std::size_t delivered{ 0 };

  double ratio() const { return sent ? static_cast<double>(delivered) / static_cast<double>(sent) : 0.0; }
};

struct MacReport
{
  std::vector<TagReport> tags;
  std::vector<WindowReport> windows;  // window-major, then tag
  std::vector<CollisionEvent> collisions;
  std::vector<SlotCorrection> corrections;
  std::vector<int> rejected;

  /// Delivered over sent, pooled across tags.
  double overall_success() const;
  double mean_ratio() const;
  double min_ratio() const;
  double max_ratio() const;
};

/// Discrete-event simulation of the blink schedule. Deterministic for a fixed stream.
MacReport run_mac(const MacConfig& config, RandomStream& rng);

/// "tag_id,sent,delivered,ratio" rows.
std::string mac_report_csv(const MacReport& report);
/// "window_start_s,tag_id,ratio" rows.
std::string mac_timeseries_csv(const MacReport& report);

}  // namespace uwbloc
