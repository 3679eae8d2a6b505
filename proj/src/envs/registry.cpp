#include <string_view>

#include "cmarl/core/env.hpp"
#include "cmarl/core/errors.hpp"
#include "cmarl/envs/box_pushing.hpp"
#include "cmarl/envs/capture_target.hpp"
#include "cmarl/envs/lbf.hpp"
#include "cmarl/envs/overcooked.hpp"
#include "cmarl/envs/pressure_plate.hpp"
#include "cmarl/envs/rware.hpp"
#include "cmarl/envs/spread.hpp"

namespace cmarl {

namespace {

/// "gymma" addresses LBF, RWARE and MPE by key prefix.
EnvFamily resolve_family(const EnvConfig& config) {
  if (config.family != EnvFamily::Gymma) return config.family;
  const std::string_view key = config.key;
  if (key.starts_with("lbforaging:") || key.starts_with("Foraging-")) return EnvFamily::Lbf;
  if (key.starts_with("rware:") || key.starts_with("rware-")) return EnvFamily::Rware;
  if (key.starts_with("mpe:") || key.starts_with("SimpleSpread-")) return EnvFamily::Mpe;
  raise(ErrorCode::UnknownKey, "gymma key '" + config.key + "' names no supported benchmark");
}

}  // namespace

EnvHandle make_env(const EnvConfig& config) {
  switch (resolve_family(config)) {
    case EnvFamily::Lbf: return std::make_unique<env::LbfEnv>(config);
    case EnvFamily::Rware: return std::make_unique<env::RwareEnv>(config);
    case EnvFamily::Mpe: return std::make_unique<env::SpreadEnv>(config);
    case EnvFamily::Overcooked: return std::make_unique<env::OvercookedEnv>(config);
    case EnvFamily::PressurePlate: return std::make_unique<env::PressurePlateEnv>(config);
    case EnvFamily::CaptureTarget: return std::make_unique<env::CaptureTargetEnv>(config);
    case EnvFamily::BoxPushing: return std::make_unique<env::BoxPushingEnv>(config);
    case EnvFamily::Gymma: break;
  }
  raise(ErrorCode::UnknownKey, "unresolved environment family");
}

int default_time_limit(const EnvConfig& config) {
  switch (resolve_family(config)) {
    case EnvFamily::Lbf: return 50;
    case EnvFamily::Rware: return 500;
    case EnvFamily::Mpe: return 25;
    case EnvFamily::Overcooked: return 500;
    case EnvFamily::PressurePlate: return 500;
    case EnvFamily::CaptureTarget: return 60;
    case EnvFamily::BoxPushing: return 60;
    case EnvFamily::Gymma: break;
  }
  return 1;
}

std::vector<std::pair<EnvFamily, std::string>> known_tasks() {
  std::vector<std::pair<EnvFamily, std::string>> out;
  for (const char* key : {"Foraging-8x8-2p-2f-coop-v2", "Foraging-2s-8x8-2p-2f-coop-v2",
                          "Foraging-10x10-3p-3f-v2", "Foraging-2s-10x10-3p-3f-v2",
                          "Foraging-15x15-3p-5f-v2", "Foraging-15x15-4p-3f-v2",
                          "Foraging-15x15-4p-5f-v2", "Foraging-2s-12x12-2p-2f-v2"}) {
    out.emplace_back(EnvFamily::Lbf, key);
  }
  for (const char* key : {"rware-tiny-2ag-hard-v1", "rware-tiny-4ag-hard-v1", "rware-small-4ag-hard-v1",
                          "rware-tiny-2ag-v1", "rware-small-4ag-v1"}) {
    out.emplace_back(EnvFamily::Rware, key);
  }
  for (const char* key : {"SimpleSpread-3-v0", "SimpleSpread-4-v0", "SimpleSpread-5-v0", "SimpleSpread-8-v0"}) {
    out.emplace_back(EnvFamily::Mpe, key);
  }
  out.emplace_back(EnvFamily::Overcooked, "cramped_room");
  for (const char* key : {"pressureplate-linear-4p-v0", "pressureplate-linear-5p-v0",
                          "pressureplate-linear-6p-v0"}) {
    out.emplace_back(EnvFamily::PressurePlate, key);
  }
  out.emplace_back(EnvFamily::CaptureTarget, "CaptureTarget-6x6-1t-2a-v0");
  out.emplace_back(EnvFamily::BoxPushing, "BoxPushing-6x6-2a-v0");
  return out;
}

}  // namespace cmarl
