#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>

namespace cmarl {

enum class EnvFamily {
  Gymma,  // resolved from the key prefix ("lbforaging:", "rware:", "mpe:")
  Lbf,
  Rware,
  Mpe,
  Overcooked,
  PressurePlate,
  CaptureTarget,
  BoxPushing,
};

/// Accepts "gymma", "gymma-lbf", "gymma-rware", "gymma-mpe", "overcooked",
/// "pressureplate", "capturetarget", "boxpushing".
EnvFamily parse_family(std::string_view name);
std::string_view family_name(EnvFamily family);

using ExtraValue = std::variant<bool, std::int64_t, double, std::string>;
using Extras = std::map<std::string, ExtraValue, std::less<>>;

/// Construction arguments of one environment instance. Names mirror the
/// environment-API argument names (key, seed, time_limit, plus extras such
/// as reward_type, obs_one_hot, target_flick_prob, sight, random_init).
struct EnvConfig {
  EnvFamily family = EnvFamily::CaptureTarget;
  std::string key;
  std::uint64_t seed = 1;
  std::optional<int> time_limit;  // empty: family default
  Extras extras;
  /// Distinguishes instances that share a seed (parallel runners).
  std::uint64_t stream_id = 0;
};

/// Reads typed extras and remembers which ones were consumed; `finish()`
/// rejects anything the environment did not ask for.
class ExtrasReader {
 public:
  explicit ExtrasReader(const Extras& extras) : extras_(extras) {}

  bool get_bool(std::string_view name, bool fallback);
  std::int64_t get_int(std::string_view name, std::int64_t fallback);
  double get_double(std::string_view name, double fallback);
  std::string get_string(std::string_view name, std::string fallback);

  void finish() const;

 private:
  const ExtraValue* find(std::string_view name);

  const Extras& extras_;
  std::set<std::string, std::less<>> used_;
};

/// Parses "true"/"false", integers, reals, otherwise a string.
ExtraValue parse_extra_value(std::string_view text);

}  // namespace cmarl
