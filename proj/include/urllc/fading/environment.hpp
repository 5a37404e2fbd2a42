// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "urllc/core/error.hpp"
#include "urllc/core/geometry.hpp"
#include "urllc/core/random.hpp"

namespace urllc::fading {

struct ScatterEnvironment {
  double room_width = 20.0;
  double room_height = 20.0;
  std::vector<Vec2> scatterers;
  Vec2 tx_position;
  double carrier_wavelength = 0.0;
  std::uint64_t seed = 0;

  Room room() const { return {room_width, room_height}; }

  void validate() const {
    detail::require(room_width > 0.0 && room_height > 0.0, "room dimensions must be > 0");
    detail::require(!scatterers.empty(), "scatterer count must be >= 1");
    detail::require(carrier_wavelength > 0.0, "carrier wavelength must be > 0");
    const Room r = room();
    detail::require(r.contains(tx_position), "tx position outside room");
    for (const auto& s : scatterers) detail::require(r.contains(s), "scatterer outside room");
  }
};

inline ScatterEnvironment sample_environment(std::size_t n_scatterers, Room room,
                                             double carrier_hz, std::uint64_t seed) {
  detail::require(n_scatterers >= 1, "n_scatterers must be >= 1");
  detail::require(room.width > 0.0 && room.height > 0.0, "room dimensions must be > 0");
  detail::require(carrier_hz > 0.0, "carrier frequency must be > 0");
  ScatterEnvironment env;
  env.room_width = room.width;
  env.room_height = room.height;
  env.tx_position = room.center();
  env.carrier_wavelength = wavelength_for(carrier_hz);
  env.seed = seed;
  CounterStream rng(seed, 0);
  env.scatterers.reserve(n_scatterers);
  for (std::size_t i = 0; i < n_scatterers; ++i) {
    const double x = rng.uniform(0.0, room.width);
    const double y = rng.uniform(0.0, room.height);
    env.scatterers.push_back({x, y});
  }
  return env;
}

// Precomputes the transmitter-side path lengths for repeated evaluation.
class FieldEvaluator {
 public:
  explicit FieldEvaluator(const ScatterEnvironment& env)
      : env_(&env), k_(2.0 * std::numbers::pi / env.carrier_wavelength),
        norm_(1.0 / std::sqrt(static_cast<double>(env.scatterers.size()))) {
    tx_.reserve(env.scatterers.size());
    for (const auto& s : env.scatterers) tx_.push_back(distance(env.tx_position, s));
  }

  std::complex<double> operator()(Vec2 rx) const {
    double re = 0.0, im = 0.0;
    const auto& sc = env_->scatterers;
    for (std::size_t i = 0; i < sc.size(); ++i) {
      const double ph = k_ * (distance(rx, sc[i]) + tx_[i]);
      re += std::cos(ph);
      im += std::sin(ph);
    }
    return {norm_ * re, norm_ * im};
  }

 private:
  const ScatterEnvironment* env_;
  double k_;
  double norm_;
  std::vector<double> tx_;
};

inline std::complex<double> channel_at(const ScatterEnvironment& env, Vec2 rx) {
  detail::require(env.room().contains(rx), "receiver position outside room");
  return FieldEvaluator(env)(rx);
}

// Versioned JSON document with the fields of ScatterEnvironment.
inline nlohmann::json to_json(const ScatterEnvironment& env) {
  nlohmann::json j;
  j["format"] = "urllc.scatter_environment";
  j["version"] = 1;
  j["room_width"] = env.room_width;
  j["room_height"] = env.room_height;
  auto& sc = j["scatterers"] = nlohmann::json::array();
  for (const auto& s : env.scatterers) sc.push_back({s.x, s.y});
  j["tx_position"] = {env.tx_position.x, env.tx_position.y};
  j["carrier_wavelength"] = env.carrier_wavelength;
  j["seed"] = env.seed;
  return j;
}

inline ScatterEnvironment environment_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "urllc.scatter_environment")
    throw InvalidArgument("environment JSON: unknown format");
  if (j.value("version", 0) != 1) throw InvalidArgument("environment JSON: unsupported version");
  ScatterEnvironment env;
  env.room_width = j.at("room_width").get<double>();
  env.room_height = j.at("room_height").get<double>();
  for (const auto& p : j.at("scatterers")) env.scatterers.push_back({p.at(0), p.at(1)});
  env.tx_position = {j.at("tx_position").at(0), j.at("tx_position").at(1)};
  env.carrier_wavelength = j.at("carrier_wavelength").get<double>();
  env.seed = j.at("seed").get<std::uint64_t>();
  env.validate();
  return env;
}

// Recipe for drawing independent environments and receiver placements.
struct EnsembleSpec {
  std::size_t n_scatterers = 100;
  Room room{};
  double carrier_hz = 3e9;
  std::uint64_t seed = 1;

  double wavelength() const { return wavelength_for(carrier_hz); }

  void validate() const {
    detail::require(n_scatterers >= 1, "n_scatterers must be >= 1");
    detail::require(room.width > 0.0 && room.height > 0.0, "room dimensions must be > 0");
    detail::require(carrier_hz > 0.0, "carrier frequency must be > 0");
  }
};

struct Placement {
  Vec2 start;
  double heading = 0.0;
};

// Member `index` of the ensemble. Receivers start uniformly in the central
// half of the room; a path too long for that region is placed uniformly
// over the starts that keep it inside.
struct EnsembleMember {
  ScatterEnvironment env;
  Placement rx;
};

inline EnsembleMember ensemble_member(const EnsembleSpec& spec, std::uint64_t index,
                                      double path_length = 0.0,
                                      std::optional<double> heading = std::nullopt) {
  const std::uint64_t s = derive_seed(spec.seed, index);
  EnsembleMember m{sample_environment(spec.n_scatterers, spec.room, spec.carrier_hz, s), {}};
  CounterStream rng(s, 1);
  const double w = spec.room.width, h = spec.room.height;
  m.rx.heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  if (heading) m.rx.heading = *heading;
  const double dx = path_length * std::cos(m.rx.heading);
  const double dy = path_length * std::sin(m.rx.heading);
  const double ux = rng.uniform(), uy = rng.uniform();
  if (std::fabs(dx) <= 0.25 * w && std::fabs(dy) <= 0.25 * h) {
    m.rx.start = {0.25 * w + 0.5 * w * ux, 0.25 * h + 0.5 * h * uy};
  } else {
    detail::require(std::fabs(dx) < w && std::fabs(dy) < h, "trajectory longer than the room");
    const double x0 = std::max(0.0, -dx), x1 = w - std::max(0.0, dx);
    const double y0 = std::max(0.0, -dy), y1 = h - std::max(0.0, dy);
    m.rx.start = {x0 + (x1 - x0) * ux, y0 + (y1 - y0) * uy};
  }
  return m;
}

}  // namespace urllc::fading
