#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "cmarl/core/env.hpp"

namespace cmarl::server {

using Json = nlohmann::json;

inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxFrameBytes = 16u << 20;

/// 4-byte big-endian payload length followed by the payload.
std::string encode_frame(std::string_view payload);

/// Incremental frame parser over an arbitrary byte stream.
class FrameDecoder {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }
  /// Next complete payload, if any. Raises BadFrame when a length prefix
  /// exceeds kMaxFrameBytes.
  std::optional<std::string> next();
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::string buffer_;
};

/// Builds an EnvConfig from hello's `env` family and `env_args` object
/// (key, seed, time_limit; every other member becomes an extra).
EnvConfig env_config_from_json(std::string_view family, const Json& env_args);

Json spec_json(const EnvSpec& spec);
Json info_json(const StepInfo& info);
StepInfo info_from_json(const Json& j);

Json ok_response(Json body = Json::object());
Json err_response(std::string_view code, std::string_view message);

/// Server-side state machine of one connection: at most one environment,
/// created by hello. Every request yields exactly one response.
class Session {
 public:
  Json handle(const Json& request);
  /// Parses the payload first; malformed JSON answers bad_frame.
  Json handle_payload(std::string_view payload);
  bool closed() const { return closed_; }

 private:
  Json dispatch(const Json& request);

  EnvHandle env_;
  bool closed_ = false;
};

}  // namespace cmarl::server
