#pragma once

// Experiment configuration file: one JSON document with sections
// {source, channel, detector, tag}. Units are part of the field names.
//
//   {
//     "preset": "tv_4g",                      // or "5g"; defaults for omitted fields
//     "source":   {"kind": "tv", "mean_power": 1, "tdd_period_ms": 1,
//                  "duty_cycle": 0.7, "burst_jitter": 0.05, "seed": 1},
//     "channel":  {"h_direct": [1, 0], "g_cascade": [0.19, 0],
//                  "refl_connected": [0, 0], "refl_disconnected": [0.5, 0],
//                  "noise_power": 0, "doppler_hz": 0,
//                  "contrast": 1.2, "snr_db": 10},   // optional, applied last
//     "detector": {"t1_us": 1, "t2_ms": 0.5, "f3_hz": 500, "f4_hz": 50,
//                  "ta_ms": 50, "causal_threshold": false,
//                  "min_sync_score": 0.875, "max_violation_fraction": 0.2},
//     "tag":      {"ts_ms": 2.7, "sync_hex": "2e", "image": ["...", ...],
//                  "repetitions": 2, "initial_level": 0, "lead_time_ms": 50}
//   }
//
// detector.ts_ms / detector.sync_hex override the tag's values on the reader
// side only.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "ambscatter/energy_detector.hpp"
#include "ambscatter/eval_harness.hpp"

namespace ambscatter {

/// Thrown for malformed configuration documents.
class ConfigFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json link_to_json(const LinkConfig& link);
LinkConfig link_from_json(const nlohmann::json& j);
LinkConfig load_link_config(const std::filesystem::path& path);

nlohmann::json report_to_json(const DecodeReport& report, const DetectorConfig& cfg);

}  // namespace ambscatter
