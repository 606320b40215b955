#include "ambscatter/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace ambscatter {

using nlohmann::json;

namespace {

void allow_keys(const json& section, const char* name, std::initializer_list<const char*> keys) {
  if (!section.is_object()) throw ConfigFileError(std::string("config: '") + name + "' must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, _] : section.items()) {
    if (!allowed.count(k)) throw ConfigFileError(std::string("config: unknown key '") + name + "." + k + "'");
  }
}

template <class T>
void read(const json& section, const char* key, T& out) {
  if (section.contains(key)) out = section.at(key).get<T>();
}

void read_scaled(const json& section, const char* key, double scale, double& out) {
  if (section.contains(key)) out = section.at(key).get<double>() * scale;
}

json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

void read_complex(const json& section, const char* key, Complex& out) {
  if (!section.contains(key)) return;
  const auto& v = section.at(key);
  if (v.is_number()) {
    out = Complex(v.get<double>(), 0.0);
  } else if (v.is_array() && v.size() == 2) {
    out = Complex(v[0].get<double>(), v[1].get<double>());
  } else {
    throw ConfigFileError(std::string("config: '") + key + "' must be a number or [re, im]");
  }
}

json image_json(const PixelImage& img) {
  json rows = json::array();
  const auto text = format_image_text(img);
  std::istringstream is(text);
  for (std::string line; std::getline(is, line);) rows.push_back(line);
  return rows;
}

PixelImage image_from_json(const json& rows, std::size_t r, std::size_t c) {
  if (!rows.is_array()) throw ConfigFileError("config: tag.image must be an array of row strings");
  std::string text;
  for (const auto& row : rows) text += row.get<std::string>() + "\n";
  return parse_image_text(text, r, c);
}

}  // namespace

json link_to_json(const LinkConfig& l) {
  json j;
  j["source"] = {{"kind", to_string(l.source.kind)},
                 {"mean_power", l.source.mean_power},
                 {"tdd_period_ms", l.source.tdd_period * 1e3},
                 {"duty_cycle", l.source.duty_cycle},
                 {"burst_jitter", l.source.burst_jitter},
                 {"seed", l.source.rng_seed}};
  j["channel"] = {{"h_direct", complex_json(l.channel.h_direct)},
                  {"g_cascade", complex_json(l.channel.g_cascade)},
                  {"refl_connected", complex_json(l.channel.refl_connected)},
                  {"refl_disconnected", complex_json(l.channel.refl_disconnected)},
                  {"noise_power", l.channel.noise_power},
                  {"doppler_hz", l.channel.doppler_hz}};
  const auto& d = l.detector;
  j["detector"] = {{"t1_us", d.t1 * 1e6},
                   {"t2_ms", d.t2 * 1e3},
                   {"f3_hz", d.f3},
                   {"f4_hz", d.f4},
                   {"ta_ms", d.ta * 1e3},
                   {"ts_ms", d.ts * 1e3},
                   {"sync_hex", bits_to_hex(d.sync)},
                   {"sync_bits", d.sync.size()},
                   {"rows", d.rows},
                   {"cols", d.cols},
                   {"causal_threshold", d.causal_threshold},
                   {"min_sync_score", d.min_sync_score},
                   {"max_violation_fraction", d.max_violation_fraction}};
  j["tag"] = {{"ts_ms", l.tag.ts * 1e3},
              {"sync_hex", bits_to_hex(l.tag.sync)},
              {"sync_bits", l.tag.sync.size()},
              {"image", image_json(l.tag.image)},
              {"repetitions", l.tag.repetitions},
              {"initial_level", l.tag.initial_level}};
  if (l.lead_time >= 0.0) j["tag"]["lead_time_ms"] = l.lead_time * 1e3;
  return j;
}

LinkConfig link_from_json(const json& j) {
  try {
    allow_keys(j, "<root>", {"preset", "source", "channel", "detector", "tag"});
    LinkConfig l = LinkConfig::tv_4g();
    if (j.contains("preset")) {
      const auto p = j.at("preset").get<std::string>();
      if (p == "5g" || p == "5g_tdd") {
        l = LinkConfig::five_g();
      } else if (p != "tv_4g" && p != "tv" && p != "4g") {
        throw ConfigFileError("config: unknown preset '" + p + "'");
      }
    }

    if (j.contains("source")) {
      const auto& s = j.at("source");
      allow_keys(s, "source", {"kind", "mean_power", "tdd_period_ms", "duty_cycle", "burst_jitter", "seed"});
      if (s.contains("kind")) l.source.kind = source_kind_from_string(s.at("kind").get<std::string>());
      read(s, "mean_power", l.source.mean_power);
      read_scaled(s, "tdd_period_ms", 1e-3, l.source.tdd_period);
      read(s, "duty_cycle", l.source.duty_cycle);
      read(s, "burst_jitter", l.source.burst_jitter);
      read(s, "seed", l.source.rng_seed);
    }

    std::optional<double> tag_ts;
    std::optional<Bits> tag_sync;
    if (j.contains("tag")) {
      const auto& t = j.at("tag");
      allow_keys(t, "tag", {"ts_ms", "sync_hex", "sync_bits", "image", "repetitions", "initial_level",
                            "lead_time_ms"});
      if (t.contains("ts_ms")) tag_ts = t.at("ts_ms").get<double>() * 1e-3;
      if (t.contains("sync_hex")) {
        const auto hex = t.at("sync_hex").get<std::string>();
        tag_sync = hex_to_bits(hex, t.value("sync_bits", 4 * hex.size()));
      }
      read(t, "repetitions", l.tag.repetitions);
      read(t, "initial_level", l.tag.initial_level);
      if (t.contains("lead_time_ms")) l.lead_time = t.at("lead_time_ms").get<double>() * 1e-3;
    }
    if (tag_ts) l.tag.ts = l.detector.ts = *tag_ts;
    if (tag_sync) l.tag.sync = l.detector.sync = *tag_sync;

    if (j.contains("detector")) {
      const auto& d = j.at("detector");
      allow_keys(d, "detector", {"t1_us", "t2_ms", "f3_hz", "f4_hz", "ta_ms", "ts_ms", "sync_hex", "sync_bits",
                                 "rows", "cols", "causal_threshold", "min_sync_score",
                                 "max_violation_fraction"});
      read_scaled(d, "t1_us", 1e-6, l.detector.t1);
      read_scaled(d, "t2_ms", 1e-3, l.detector.t2);
      read(d, "f3_hz", l.detector.f3);
      read(d, "f4_hz", l.detector.f4);
      read_scaled(d, "ta_ms", 1e-3, l.detector.ta);
      read_scaled(d, "ts_ms", 1e-3, l.detector.ts);
      if (d.contains("sync_hex")) {
        const auto hex = d.at("sync_hex").get<std::string>();
        l.detector.sync = hex_to_bits(hex, d.value("sync_bits", 4 * hex.size()));
      }
      read(d, "rows", l.detector.rows);
      read(d, "cols", l.detector.cols);
      read(d, "causal_threshold", l.detector.causal_threshold);
      read(d, "min_sync_score", l.detector.min_sync_score);
      read(d, "max_violation_fraction", l.detector.max_violation_fraction);
    }
    l.detector.frame_bits = l.detector.payload_bits() + l.detector.sync.size();

    if (j.contains("tag") && j.at("tag").contains("image")) {
      l.tag.image = image_from_json(j.at("tag").at("image"), l.detector.rows, l.detector.cols);
    } else if (l.tag.image.rows() != l.detector.rows || l.tag.image.cols() != l.detector.cols) {
      l.tag.image = PixelImage(l.detector.rows, l.detector.cols);
    }

    if (j.contains("channel")) {
      const auto& c = j.at("channel");
      allow_keys(c, "channel", {"h_direct", "g_cascade", "refl_connected", "refl_disconnected", "noise_power",
                                "doppler_hz", "contrast", "snr_db"});
      read_complex(c, "h_direct", l.channel.h_direct);
      read_complex(c, "g_cascade", l.channel.g_cascade);
      read_complex(c, "refl_connected", l.channel.refl_connected);
      read_complex(c, "refl_disconnected", l.channel.refl_disconnected);
      read(c, "noise_power", l.channel.noise_power);
      read(c, "doppler_hz", l.channel.doppler_hz);
      if (c.contains("contrast")) l.channel = with_contrast(l.channel, c.at("contrast").get<double>());
      if (c.contains("snr_db"))
        l.channel.noise_power =
            noise_power_for_snr(l.channel, l.source.average_power(), c.at("snr_db").get<double>());
    }
    l.check();
    return l;
  } catch (const json::exception& e) {
    throw ConfigFileError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigFileError(std::string("config: ") + e.what());
  }
}

LinkConfig load_link_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigFileError(path.string() + ": " + e.what());
  }
  return link_from_json(j);
}

json report_to_json(const DecodeReport& r, const DetectorConfig& cfg) {
  json j;
  j["status"] = r.status();
  j["sync_found"] = r.sync_found();
  j["sync_hex"] = bits_to_hex(r.sync);
  j["sync_bits"] = r.sync.size();
  j["candidates"] = r.candidates;
  j["too_short"] = r.too_short;
  j["fm0_violations"] = r.fm0_violations;
  j["symbol_stream_hex"] = bits_to_hex(r.symbol_stream);
  j["symbol_stream_bits"] = r.symbol_stream.size();
  auto& frames = j["frames"] = json::array();
  for (const auto& f : r.frames) {
    frames.push_back({{"image", image_json(f.image)},
                      {"payload_hex", bits_to_hex(image_to_bits(f.image))},
                      {"score", f.score},
                      {"sync_matches", f.sync_matches},
                      {"timing_offset_s", f.timing_offset},
                      {"candidate_offset_s", f.candidate_offset},
                      {"fm0_violations", f.fm0_violations}});
  }
  j["detector"] = {{"t1_us", cfg.t1 * 1e6}, {"t2_ms", cfg.t2 * 1e3}, {"f3_hz", cfg.f3},
                   {"f4_hz", cfg.f4},       {"ta_ms", cfg.ta * 1e3},  {"ts_ms", cfg.ts * 1e3}};
  return j;
}

}  // namespace ambscatter
