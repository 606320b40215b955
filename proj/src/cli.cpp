#include "ambscatter/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ambscatter/capture_io.hpp"
#include "ambscatter/config.hpp"
#include "ambscatter/eval_harness.hpp"

namespace ambscatter {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigOpts {
  std::string path;
  std::string preset;
  std::vector<std::string> sets;

  void add_to(CLI::App* app) {
    app->add_option("-c,--config", path, "JSON configuration file");
    app->add_option("--preset", preset, "tv_4g or 5g, used when no config file is given")
        ->check(CLI::IsMember({"tv_4g", "tv", "4g", "5g", "5g_tdd"}));
    app->add_option("--set", sets, "override a field, e.g. detector.ts_ms=0.5 (repeatable)");
  }

  json document(const json* fallback = nullptr) const {
    json j;
    if (!path.empty()) {
      std::ifstream in(path);
      if (!in) throw ConfigFileError("cannot open config file " + path);
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw ConfigFileError(path + ": " + e.what());
      }
    } else if (fallback) {
      j = *fallback;
    } else {
      j = json::object();
    }
    if (!preset.empty()) j["preset"] = preset;
    for (const auto& s : sets) apply_set(j, s);
    return j;
  }

  LinkConfig link(const json* fallback = nullptr) const { return link_from_json(document(fallback)); }

  static void apply_set(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json* node = &j;
    std::size_t start = 0;
    for (;;) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      if (!node->is_object()) throw UsageError("--set: '" + key + "' does not name an object field");
      if (dot == std::string::npos) {
        json value = json::parse(raw, nullptr, false);
        (*node)[part] = value.is_discarded() ? json(raw) : value;
        return;
      }
      node = &(*node)[part];
      if (node->is_null()) *node = json::object();
      start = dot + 1;
    }
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw CaptureError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw CaptureError("write error on " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw CaptureError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string bit_string(std::span<const std::uint8_t> bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s += b ? '1' : '0';
  return s;
}

json image_rows(const PixelImage& img) {
  json rows = json::array();
  std::istringstream is(format_image_text(img));
  for (std::string line; std::getline(is, line);) rows.push_back(line);
  return rows;
}

void print_violations(const std::vector<Violation>& vs, std::ostream& os) {
  for (const auto& v : vs) os << "violation: " << to_string(v.constraint) << ": " << v.message << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ambient backscatter link toolkit: FM0 tag encoder, link simulator and energy-detector reader"};
  app.name("ambscatter");
  app.require_subcommand(1);

  // encode
  auto* enc = app.add_subcommand("encode", "image file -> frame bits and FM0 levels");
  std::string enc_image, enc_bits_out, enc_levels_out, enc_sync;
  int enc_initial = 0;
  std::size_t enc_reps = 1;
  enc->add_option("-i,--image", enc_image, "'#'/'.' image file (default: built-in test image)");
  enc->add_option("--sync", enc_sync, "sync word as hex (default: built-in)");
  enc->add_option("--initial-level", enc_initial, "level before the first boundary")->check(CLI::Range(0, 1));
  enc->add_option("--repetitions", enc_reps, "frames in the level stream")->check(CLI::PositiveNumber);
  enc->add_option("--bits-out", enc_bits_out, "write frame bits ('0'/'1') here instead of stdout");
  enc->add_option("--levels-out", enc_levels_out, "write FM0 levels ('0'/'1') here instead of stdout");

  // simulate
  auto* sim = app.add_subcommand("simulate", "config -> IQ capture + ground-truth sidecar");
  ConfigOpts sim_cfg;
  sim_cfg.add_to(sim);
  std::string sim_out, sim_format = "cf32le", sim_sidecar;
  std::uint64_t sim_seed = 1;
  sim->add_option("-o,--out", sim_out, "capture file")->required();
  sim->add_option("--format", sim_format, "cf32le or cu8")->check(CLI::IsMember({"cf32le", "cf32", "cu8"}));
  sim->add_option("--seed", sim_seed, "simulation seed");
  sim->add_option("--sidecar", sim_sidecar, "sidecar JSON path (default: <out>.json)");

  // decode
  auto* dec = app.add_subcommand("decode", "capture -> decoded image(s)");
  ConfigOpts dec_cfg;
  dec_cfg.add_to(dec);
  std::string dec_in, dec_format, dec_sidecar, dec_report, dec_traces;
  double dec_rate = 0.0;
  bool dec_allow = false, dec_no_sidecar = false;
  dec->add_option("input", dec_in, "capture file")->required();
  dec->add_option("--format", dec_format, "cf32le or cu8 (default: sidecar, else cf32le)")
      ->check(CLI::IsMember({"cf32le", "cf32", "cu8"}));
  dec->add_option("--sample-rate", dec_rate, "Hz (default: sidecar, else 1/t1)");
  dec->add_option("--sidecar", dec_sidecar, "sidecar JSON (default: <input>.json if present)");
  dec->add_flag("--no-sidecar", dec_no_sidecar, "ignore <input>.json");
  dec->add_option("--report", dec_report, "write the JSON report here ('-' for stdout)");
  dec->add_option("--traces", dec_traces, "write per-stage CSV traces here");
  dec->add_flag("--allow-violations", dec_allow, "decode even if the parameters violate a constraint");

  // sweep
  auto* swp = app.add_subcommand("sweep", "Monte-Carlo sweep -> CSV / JSON");
  ConfigOpts swp_cfg;
  swp_cfg.add_to(swp);
  std::string swp_axis = "snr_db", swp_csv, swp_json;
  std::vector<double> swp_grid;
  std::size_t swp_trials = 100;
  std::uint64_t swp_seed = 1;
  unsigned swp_threads = 0;
  swp->add_option("--axis", swp_axis, "snr_db, contrast_db, doppler_hz or ts (seconds)")
      ->check(CLI::IsMember({"snr_db", "contrast_db", "doppler_hz", "ts"}));
  swp->add_option("--grid", swp_grid, "comma-separated grid values")->required()->delimiter(',');
  swp->add_option("--trials", swp_trials, "trials per grid point")->check(CLI::PositiveNumber);
  swp->add_option("--seed", swp_seed, "base seed");
  swp->add_option("--threads", swp_threads, "worker threads (0 = all cores)");
  swp->add_option("--csv", swp_csv, "CSV output (default: stdout)");
  swp->add_option("--json", swp_json, "JSON output");

  // validate
  auto* val = app.add_subcommand("validate", "check the parameter constraints of a config");
  ConfigOpts val_cfg;
  val_cfg.add_to(val);

  // bench
  auto* bch = app.add_subcommand("bench", "decoder throughput");
  ConfigOpts bch_cfg;
  bch_cfg.add_to(bch);
  double bch_duration = 10.0;
  bch->add_option("--duration", bch_duration, "seconds of signal at F1")->check(CLI::Range(1.0, 3600.0));

  if (argc <= 1) {
    out << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*enc) {
      PixelImage img = enc_image.empty() ? default_image() : parse_image_text(read_text(enc_image));
      Bits sync = enc_sync.empty() ? Bits(kDefaultSync.begin(), kDefaultSync.end())
                                   : hex_to_bits(enc_sync, 4 * enc_sync.size());
      const auto frame = frame_from_image(img, sync).bits();
      const auto levels =
          fm0_encode_repeated(frame, enc_reps, static_cast<std::uint8_t>(enc_initial)).levels;
      if (enc_bits_out.empty()) {
        out << "frame_bits " << frame.size() << " " << bit_string(frame) << "\n";
      } else {
        write_text(enc_bits_out, bit_string(frame) + "\n");
      }
      if (enc_levels_out.empty()) {
        out << "fm0_levels " << levels.size() << " " << bit_string(levels) << "\n";
      } else {
        write_text(enc_levels_out, bit_string(levels) + "\n");
      }
      return kExitOk;
    }

    if (*sim) {
      const auto link = sim_cfg.link();
      const auto format = capture_format_from_string(sim_format);
      const auto s = simulate_link(link, sim_seed);
      const auto st = write_capture(s.iq, sim_out, format);
      json side;
      side["sample_rate_hz"] = s.iq.sample_rate;
      side["center_freq_hz"] = s.iq.center_freq;
      side["format"] = to_string(format);
      side["seed"] = sim_seed;
      side["samples"] = st.samples;
      side["clipped"] = st.clipped;
      side["config"] = link_to_json(link);
      side["truth"] = {{"image", image_rows(link.tag.image)},
                       {"payload_hex", bits_to_hex(image_to_bits(link.tag.image))},
                       {"sync_hex", bits_to_hex(link.tag.sync)},
                       {"repetitions", link.tag.repetitions},
                       {"symbol_period_s", s.tag.symbol_period},
                       {"start_offset_s", s.tag.start_offset},
                       {"frame_starts_s", s.frame_starts},
                       {"source_seed", s.source_seed},
                       {"noise_seed", s.noise_seed}};
      const fs::path side_path = sim_sidecar.empty() ? fs::path(sim_out + ".json") : fs::path(sim_sidecar);
      write_text(side_path, side.dump(2) + "\n");
      err << "wrote " << st.samples << " samples (" << to_string(format) << ") to " << sim_out;
      if (st.clipped) err << ", " << st.clipped << " clipped";
      err << "; sidecar " << side_path.string() << "\n";
      return kExitOk;
    }

    if (*dec) {
      json side = json::object();
      fs::path side_path = dec_sidecar;
      if (side_path.empty() && !dec_no_sidecar && fs::exists(dec_in + ".json")) side_path = dec_in + ".json";
      if (!side_path.empty()) {
        try {
          side = json::parse(read_text(side_path));
        } catch (const json::exception& e) {
          throw ConfigFileError(side_path.string() + ": " + e.what());
        }
      }
      const json* fallback = side.contains("config") ? &side["config"] : nullptr;
      const auto link = dec_cfg.link(fallback);
      const auto& cfg = link.detector;

      std::string fmt = dec_format;
      if (fmt.empty()) fmt = side.value("format", std::string("cf32le"));
      double rate = dec_rate;
      if (rate <= 0.0) rate = side.value("sample_rate_hz", cfg.f1());
      const auto iq = read_capture(dec_in, capture_format_from_string(fmt), rate,
                                   side.value("center_freq_hz", 0.0));

      const auto violations = validate(cfg, link.source);
      if (!violations.empty()) {
        print_violations(violations, err);
        if (!dec_allow) return kExitFail;
      }
      DecodeOptions opts;
      opts.allow_violations = true;
      opts.keep_traces = !dec_traces.empty();
      const auto report = decode(iq, cfg, opts);

      const bool report_stdout = dec_report == "-";
      if (!report_stdout) {
        for (std::size_t i = 0; i < report.frames.size(); ++i) {
          if (i) out << "\n";
          out << format_image_text(report.frames[i].image);
        }
      }
      json j = report_to_json(report, cfg);
      j["input"] = dec_in;
      j["config"] = link_to_json(link);
      if (report_stdout) {
        out << j.dump(2) << "\n";
      } else if (!dec_report.empty()) {
        write_text(dec_report, j.dump(2) + "\n");
      }
      if (report.traces && !dec_traces.empty()) {
        std::ofstream t(dec_traces, std::ios::trunc);
        if (!t) throw CaptureError("cannot open " + dec_traces + " for writing");
        report.traces->write_csv(t);
      }
      err << report.status() << "\n";
      return report.sync_found() ? kExitOk : kExitFail;
    }

    if (*swp) {
      SweepSpec spec;
      spec.axis = sweep_axis_from_string(swp_axis);
      spec.grid = swp_grid;
      spec.trials_per_point = swp_trials;
      spec.base = swp_cfg.link();
      spec.rng_seed = swp_seed;
      spec.threads = swp_threads;
      const auto result = run_sweep(spec);
      if (swp_csv.empty()) {
        result.write_csv(out);
      } else {
        std::ostringstream ss;
        result.write_csv(ss);
        write_text(swp_csv, ss.str());
      }
      if (!swp_json.empty()) write_text(swp_json, result.to_json() + "\n");
      return kExitOk;
    }

    if (*val) {
      const auto link = val_cfg.link();
      const auto vs = validate(link.detector, link.source);
      const auto& d = link.detector;
      out << "source " << to_string(link.source.kind) << ", Ts " << d.ts * 1e3 << " ms, Fs " << d.fs()
          << " Hz, Fb " << d.fb() << " Hz, F3 " << d.f3 << " Hz, F4 " << d.f4 << " Hz, F1 " << d.f1()
          << " Hz, F2 " << d.f2() << " Hz, Ta " << d.ta * 1e3 << " ms\n";
      if (vs.empty()) {
        out << "ok: all constraints satisfied\n";
        return kExitOk;
      }
      print_violations(vs, out);
      return kExitFail;
    }

    if (*bch) {
      const auto link = bch_cfg.link();
      const auto r = bench_throughput(bch_duration, link);
      out << "samples " << r.samples << "\nseconds " << r.seconds << "\nsamples_per_second "
          << r.samples_per_second << "\nrealtime_factor " << r.samples_per_second / link.detector.f1()
          << "\nframes " << r.frames << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    print_violations(e.violations, err);
    return kExitFail;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigFileError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CaptureError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

int cli_main(int argc, const char* const* argv) { return cli_main(argc, argv, std::cout, std::cerr); }

}  // namespace ambscatter
