#include "cmarl/server/protocol.hpp"

#include "cmarl/core/errors.hpp"

namespace cmarl::server {

std::string encode_frame(std::string_view payload) {
  if (payload.size() > kMaxFrameBytes) raise(ErrorCode::BadFrame, "payload exceeds the frame limit");
  const auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(payload.size() + 4);
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out.append(payload);
  return out;
}

std::optional<std::string> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const auto byte = [this](int k) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer_[static_cast<std::size_t>(k)])); };
  const std::uint32_t n = byte(0) << 24 | byte(1) << 16 | byte(2) << 8 | byte(3);
  if (n > kMaxFrameBytes) raise(ErrorCode::BadFrame, "frame of " + std::to_string(n) + " bytes exceeds the limit");
  if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  std::string payload = buffer_.substr(4, n);
  buffer_.erase(0, 4 + static_cast<std::size_t>(n));
  return payload;
}

EnvConfig env_config_from_json(std::string_view family, const Json& args) {
  if (!args.is_object()) raise(ErrorCode::BadExtra, "env_args must be an object");
  EnvConfig c;
  c.family = parse_family(family);
  for (const auto& [name, value] : args.items()) {
    if (name == "key") {
      if (!value.is_string()) raise(ErrorCode::BadExtra, "key must be a string");
      c.key = value.get<std::string>();
    } else if (name == "seed") {
      if (!value.is_number_integer()) raise(ErrorCode::BadExtra, "seed must be an integer");
      c.seed = value.get<std::uint64_t>();
    } else if (name == "time_limit") {
      if (!value.is_number_integer()) raise(ErrorCode::BadExtra, "time_limit must be an integer");
      c.time_limit = value.get<int>();
    } else if (value.is_boolean()) {
      c.extras[name] = value.get<bool>();
    } else if (value.is_number_integer()) {
      c.extras[name] = value.get<std::int64_t>();
    } else if (value.is_number()) {
      c.extras[name] = value.get<double>();
    } else if (value.is_string()) {
      c.extras[name] = value.get<std::string>();
    } else {
      raise(ErrorCode::BadExtra, "env_args." + name + " has an unsupported type");
    }
  }
  return c;
}

Json spec_json(const EnvSpec& s) {
  return {{"n_agents", s.n_agents}, {"n_actions", s.n_actions}, {"obs_dim", s.obs_dim},
          {"state_dim", s.state_dim}, {"time_limit", s.time_limit}};
}

Json info_json(const StepInfo& info) {
  return {{"truncated", info.truncated}, {"terminated", info.terminated}, {"agent_rewards", info.agent_rewards},
          {"extras", info.extras}};
}

StepInfo info_from_json(const Json& j) {
  StepInfo info;
  info.truncated = j.at("truncated").get<bool>();
  info.terminated = j.at("terminated").get<bool>();
  info.agent_rewards = j.at("agent_rewards").get<Vec>();
  info.extras = j.at("extras").get<std::map<std::string, double>>();
  return info;
}

Json ok_response(Json body) {
  body["type"] = "ok";
  return body;
}

Json err_response(std::string_view code, std::string_view message) {
  return {{"type", "err"}, {"code", code}, {"message", message}};
}

Json Session::handle_payload(std::string_view payload) {
  Json request;
  try {
    request = Json::parse(payload);
  } catch (const Json::parse_error& e) {
    return err_response("bad_frame", e.what());
  }
  return handle(request);
}

Json Session::handle(const Json& request) {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    return err_response(to_string(e.code()), e.what());
  } catch (const Json::exception& e) {
    return err_response("bad_frame", e.what());
  }
}

Json Session::dispatch(const Json& request) {
  if (!request.is_object() || !request.contains("type") || !request["type"].is_string()) {
    return err_response("bad_frame", "request needs a string 'type'");
  }
  const std::string type = request["type"].get<std::string>();
  if (type == "hello") {
    if (request.contains("v") && request["v"] != kProtocolVersion) {
      return err_response("bad_frame", "unsupported protocol version");
    }
    EnvConfig c = env_config_from_json(request.at("env").get<std::string>(),
                                       request.contains("env_args") ? request["env_args"] : Json::object());
    env_ = make_env(c);
    closed_ = false;
    Json body = spec_json(env_->spec());
    body["v"] = kProtocolVersion;
    return ok_response(std::move(body));
  }
  if (!env_) return err_response("no_env", "send hello before '" + type + "'");
  if (type == "reset") {
    const ObsStateSnapshot s = env_->reset();
    return ok_response({{"obs", s.obs}, {"state", s.state}});
  }
  if (type == "step") {
    const Json& a = request.at("actions");
    if (!a.is_array()) return err_response("bad_action", "actions must be an array of integers");
    std::vector<int> actions;
    for (const Json& x : a) {
      if (!x.is_number_integer()) return err_response("bad_action", "actions must be integers");
      actions.push_back(x.get<int>());
    }
    const StepOutcome r = env_->step(actions);
    return ok_response({{"reward", r.reward}, {"done", r.done}, {"info", info_json(r.info)},
                        {"obs", env_->get_obs()}, {"state", env_->get_state()}});
  }
  if (type == "obs") return ok_response({{"obs", env_->get_obs()}});
  if (type == "state") return ok_response({{"state", env_->get_state()}});
  if (type == "spec") return ok_response(spec_json(env_->spec()));
  if (type == "close") {
    env_->close();
    env_.reset();
    closed_ = true;
    return ok_response();
  }
  return err_response("bad_frame", "unknown request type '" + type + "'");
}

}  // namespace cmarl::server
