#include "cmarl/core/config.hpp"

#include <charconv>
#include <cstdlib>

#include "cmarl/core/errors.hpp"

namespace cmarl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownKey: return "unknown_key";
    case ErrorCode::BadExtra: return "bad_extra";
    case ErrorCode::BadConfig: return "bad_config";
    case ErrorCode::Closed: return "closed";
    case ErrorCode::EpisodeOver: return "episode_over";
    case ErrorCode::BadAction: return "bad_action";
    case ErrorCode::UnsatisfiableSpawn: return "unsatisfiable_spawn";
    case ErrorCode::DimMismatch: return "dim_mismatch";
    case ErrorCode::StaleTape: return "stale_tape";
    case ErrorCode::Underfilled: return "underfilled";
    case ErrorCode::BadId: return "bad_id";
    case ErrorCode::EmptyStream: return "empty_stream";
    case ErrorCode::BadFrame: return "bad_frame";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

EnvFamily parse_family(std::string_view name) {
  if (name == "gymma") return EnvFamily::Gymma;
  if (name == "gymma-lbf" || name == "lbf") return EnvFamily::Lbf;
  if (name == "gymma-rware" || name == "rware") return EnvFamily::Rware;
  if (name == "gymma-mpe" || name == "mpe") return EnvFamily::Mpe;
  if (name == "overcooked") return EnvFamily::Overcooked;
  if (name == "pressureplate") return EnvFamily::PressurePlate;
  if (name == "capturetarget") return EnvFamily::CaptureTarget;
  if (name == "boxpushing") return EnvFamily::BoxPushing;
  raise(ErrorCode::UnknownKey, "unknown environment family '" + std::string(name) + "'");
}

std::string_view family_name(EnvFamily family) {
  switch (family) {
    case EnvFamily::Gymma: return "gymma";
    case EnvFamily::Lbf: return "gymma-lbf";
    case EnvFamily::Rware: return "gymma-rware";
    case EnvFamily::Mpe: return "gymma-mpe";
    case EnvFamily::Overcooked: return "overcooked";
    case EnvFamily::PressurePlate: return "pressureplate";
    case EnvFamily::CaptureTarget: return "capturetarget";
    case EnvFamily::BoxPushing: return "boxpushing";
  }
  return "unknown";
}

const ExtraValue* ExtrasReader::find(std::string_view name) {
  auto it = extras_.find(name);
  if (it == extras_.end()) return nullptr;
  used_.insert(std::string(name));
  return &it->second;
}

namespace {

[[noreturn]] void ill_typed(std::string_view name, std::string_view want) {
  raise(ErrorCode::BadExtra,
        "extra '" + std::string(name) + "' must be " + std::string(want));
}

}  // namespace

bool ExtrasReader::get_bool(std::string_view name, bool fallback) {
  const ExtraValue* v = find(name);
  if (!v) return fallback;
  if (auto b = std::get_if<bool>(v)) return *b;
  ill_typed(name, "a boolean");
}

std::int64_t ExtrasReader::get_int(std::string_view name, std::int64_t fallback) {
  const ExtraValue* v = find(name);
  if (!v) return fallback;
  if (auto i = std::get_if<std::int64_t>(v)) return *i;
  ill_typed(name, "an integer");
}

double ExtrasReader::get_double(std::string_view name, double fallback) {
  const ExtraValue* v = find(name);
  if (!v) return fallback;
  if (auto d = std::get_if<double>(v)) return *d;
  if (auto i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
  ill_typed(name, "a number");
}

std::string ExtrasReader::get_string(std::string_view name, std::string fallback) {
  const ExtraValue* v = find(name);
  if (!v) return fallback;
  if (auto s = std::get_if<std::string>(v)) return *s;
  ill_typed(name, "a string");
}

void ExtrasReader::finish() const {
  for (const auto& [name, value] : extras_) {
    if (!used_.contains(name)) {
      raise(ErrorCode::BadExtra, "unknown extra argument '" + name + "'");
    }
  }
}

ExtraValue parse_extra_value(std::string_view text) {
  if (text == "true" || text == "True") return true;
  if (text == "false" || text == "False") return false;
  std::int64_t i = 0;
  auto [iend, iec] = std::from_chars(text.data(), text.data() + text.size(), i);
  if (iec == std::errc() && iend == text.data() + text.size()) return i;
  const std::string owned(text);
  char* end = nullptr;
  const double d = std::strtod(owned.c_str(), &end);
  if (!owned.empty() && end == owned.c_str() + owned.size()) return d;
  return owned;
}

}  // namespace cmarl
