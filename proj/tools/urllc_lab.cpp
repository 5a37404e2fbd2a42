// SPDX-License-Identifier: Apache-2.0
//
// urllc_lab: one subcommand per experiment. Every run writes its data files
// plus a <stem>.manifest.json into --out-dir.

#include <fftw3.h>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "urllc/urllc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace urllc;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  unsigned threads = 1;

  Parallelism par() const { return {threads, 4096}; }
};

// Collects what a command produced; turned into the manifest at the end.
struct Run {
  std::string command;
  json config = json::object();
  std::vector<std::string> outputs;
  fs::path dir;

  fs::path path(const std::string& name) const { return dir / name; }

  std::ofstream open(const std::string& name) {
    std::ofstream os(path(name), std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path(name).string() + " for writing");
    os.imbue(std::locale::classic());
    outputs.push_back(name);
    return os;
  }

  void write_json(const std::string& name, const json& j) {
    auto os = open(name);
    os << j.dump(2) << '\n';
  }
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_hash(const Run& r) { return hex64(fnv1a(r.command + '\n' + r.config.dump())); }

json versions() {
  return {{"urllc", URLLC_VERSION},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"fftw", std::string(fftw_version)},
          {"compiler", __VERSION__}};
}

void write_manifest(Run& r, const std::vector<std::string>& argv, double wall, const std::string& stem) {
  for (const auto& o : r.outputs) {
    std::error_code ec;
    if (!fs::exists(r.path(o)) || fs::file_size(r.path(o), ec) == 0)
      throw std::runtime_error("output " + o + " is missing or empty");
  }
  json m;
  m["command_line"] = argv;
  m["command"] = r.command;
  m["config"] = r.config;
  m["config_hash"] = config_hash(r);
  m["seed"] = r.config.value("seed", std::uint64_t{0});
  m["versions"] = versions();
  m["outputs"] = r.outputs;
  m["wall_seconds"] = wall;
  std::ofstream os(r.path(stem + ".manifest.json"), std::ios::binary | std::ios::trunc);
  os << m.dump(2) << '\n';
}

std::vector<double> parse_list(const std::string& s, const std::string& flag) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  if (v.empty()) throw UsageError(flag + ": empty list");
  return v;
}

void add_common(CLI::App* c, Common& k) {
  c->add_option("--out-dir", k.out_dir, "Directory for output files")->capture_default_str();
  c->add_option("--seed", k.seed, "Master seed (URLLC_LAB_SEED overrides)")->capture_default_str();
  c->add_option("--threads", k.threads, "Worker threads")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
}

// ---------------------------------------------------------------- fading

struct FadingFlags {
  std::size_t n = 100;
  double speed = 10.0;
  double fc = 3e9;
  std::size_t trials = 0;
};

void add_fading(CLI::App* c, FadingFlags& f, std::size_t default_trials) {
  f.trials = default_trials;
  c->add_option("--n", f.n, "Scatterers per environment")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--fc", f.fc, "Carrier frequency [Hz]")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--trials,--traces", f.trials, "Independent environments (traces for psd/bandwidth)")->check(CLI::PositiveNumber)->capture_default_str();
}

fading::EnsembleSpec ensemble(const FadingFlags& f, std::uint64_t seed) {
  fading::EnsembleSpec s;
  s.n_scatterers = f.n;
  s.carrier_hz = f.fc;
  s.seed = seed;
  return s;
}

void cmd_cdf(Run& r, const Common& k, const FadingFlags& f, std::size_t points) {
  const auto spec = ensemble(f, k.seed);
  r.config = {{"n", f.n}, {"fc", f.fc}, {"trials", f.trials}, {"points", points}, {"seed", k.seed}};
  const auto cdf = fading::empirical_energy_cdf(spec, f.trials, k.par());
  const double ks = cdf.ks_distance(fading::rayleigh_energy_cdf);
  auto os = r.open("fig1b_energy_cdf.csv");
  csv::Writer w(os);
  w.comment("energy |h|^2 at a fixed receiver, n=" + std::to_string(f.n) + ", samples=" +
            std::to_string(f.trials));
  if (f.n == 2)
    w.comment("warning: two scatterers give a non-Rayleigh law with a much heavier deep-fade "
              "tail (10+ dB extra margin); do not use as a Rayleigh proxy");
  w.comment("ks_distance_to_exp1=" + csv::prob(ks));
  w.header({"energy", "energy_db", "empirical_cdf", "rayleigh_cdf"});
  for (std::size_t i = 0; i < points; ++i) {
    const double db = -40.0 + 50.0 * static_cast<double>(i) / static_cast<double>(points - 1);
    const double x = db_to_linear(db);
    w.row({csv::prob(x), csv::db(db), csv::prob(cdf(x)), csv::prob(fading::rayleigh_energy_cdf(x))});
  }
}

void cmd_covariance(Run& r, const Common& k, const FadingFlags& f, std::size_t points,
                    double max_wl) {
  const auto spec = ensemble(f, k.seed);
  r.config = {{"n", f.n},           {"fc", f.fc},         {"speed", f.speed},
              {"trials", f.trials}, {"points", points},   {"max_wavelengths", max_wl},
              {"seed", k.seed}};
  const double lambda = spec.wavelength();
  std::vector<double> lags(points);
  for (std::size_t i = 0; i < points; ++i)
    lags[i] = max_wl * lambda * static_cast<double>(i) / static_cast<double>(points - 1) / f.speed;
  const auto est = fading::empirical_covariance(spec, f.speed, lags, f.trials, k.par());
  auto os = r.open("fig3a_covariance.csv");
  csv::Writer w(os);
  w.comment("E[h(tau) h*(0)] against J0(2 pi v tau / lambda), environments=" +
            std::to_string(f.trials));
  w.comment("rms_error=" + csv::prob(fading::covariance_rms_error(est, f.speed, lambda)));
  w.header({"distance_wavelengths", "empirical", "empirical_imag", "theoretical_J0"});
  for (std::size_t i = 0; i < points; ++i)
    w.row({csv::num(est.distance_wavelengths(i, f.speed, lambda)), csv::num(est.mean[i].real()),
           csv::num(est.mean[i].imag()),
           csv::num(fading::theoretical_covariance(f.speed, lags[i], lambda))});
}

struct PsdFlags {
  double duration = 1.0;
  double sample_rate = 4000.0;
  std::string window = "hann";
  std::size_t segment = 0;
};

fading::Window parse_window(const std::string& s) {
  if (s == "hann") return fading::Window::Hann;
  if (s == "rect") return fading::Window::Rectangular;
  throw UsageError("--window: expected hann or rect, got '" + s + "'");
}

void cmd_psd(Run& r, const Common& k, const FadingFlags& f, const PsdFlags& p) {
  const auto spec = ensemble(f, k.seed);
  r.config = {{"n", f.n},          {"fc", f.fc},           {"speed", f.speed},
              {"traces", f.trials}, {"duration", p.duration}, {"sample_rate", p.sample_rate},
              {"window", p.window}, {"segment", p.segment}, {"seed", k.seed}};
  fading::PsdOptions o;
  o.speed = f.speed;
  o.duration = p.duration;
  o.sample_rate = p.sample_rate;
  o.n_traces = f.trials;
  o.window = parse_window(p.window);
  o.segment_length = p.segment;
  const auto est = fading::psd_estimate(spec, o, k.par());
  const auto& sp = est.spectrum;
  const double edge = 1.0 / spec.wavelength();
  auto os = r.open("fig3b_psd.csv");
  csv::Writer w(os);
  w.comment("one-sided Welch PSD over spatial frequency, window=" + p.window + ", segments=" +
            std::to_string(est.segments));
  w.comment("doppler_edge_cycles_per_m=" + csv::num(edge) + " in_band_fraction=" +
            csv::prob(sp.band_fraction(edge)) + " tail_slope_db_per_decade=" +
            csv::db(fading::tail_slope_db_per_decade(sp, 1.1 * edge, 10.0 * edge)));
  w.header({"frequency_cycles_per_m", "frequency_over_edge", "psd", "psd_db"});
  for (std::size_t i = 0; i < sp.frequencies.size(); ++i) {
    const double v = sp.power_density[i];
    w.row({csv::num(sp.frequencies[i]), csv::num(sp.frequencies[i] / edge), csv::num(v),
           v > 0.0 ? csv::db(linear_to_db(v)) : "-inf"});
  }
}

void cmd_bandwidth(Run& r, const Common& k, const FadingFlags& f, const std::string& speeds_s,
                   const std::string& fractions_s, double path_m, double per_wl,
                   const std::string& window) {
  const auto speeds = parse_list(speeds_s, "--speeds");
  const auto fractions = parse_list(fractions_s, "--fractions");
  for (double v : speeds)
    if (!(v > 0.0)) throw UsageError("--speeds: speeds must be > 0");
  for (double q : fractions)
    if (!(q > 0.0 && q < 1.0)) throw UsageError("--fractions: values must lie in (0, 1)");
  r.config = {{"n", f.n},           {"fc", f.fc},
              {"traces", f.trials}, {"speeds", speeds},
              {"fractions", fractions}, {"path_m", path_m},
              {"samples_per_wavelength", per_wl}, {"window", window},
              {"seed", k.seed}};
  auto os = r.open("fig4_bandwidth.csv");
  csv::Writer w(os);
  w.comment("energy bandwidth of the spatial PSD; each speed uses an independent ensemble");
  w.header({"speed_mps", "energy_fraction", "bandwidth_cycles_per_m", "bandwidth_hz"});
  for (std::size_t i = 0; i < speeds.size(); ++i) {
    auto spec = ensemble(f, derive_seed(k.seed, i));
    fading::PsdOptions o;
    o.speed = speeds[i];
    o.duration = path_m / speeds[i];
    o.sample_rate = per_wl * speeds[i] / spec.wavelength();
    o.n_traces = f.trials;
    o.window = parse_window(window);
    const auto est = fading::psd_estimate(spec, o, k.par());
    for (double q : fractions) {
      const double bw = fading::energy_bandwidth(est.spectrum, q);
      w.row({csv::num(speeds[i]), csv::num(q), csv::num(bw), csv::num(bw * speeds[i])});
    }
  }
}

void cmd_packet(Run& r, const Common& k, const FadingFlags& f, double packet_us,
                double threshold_db, std::size_t samples) {
  const auto spec = ensemble(f, k.seed);
  r.config = {{"n", f.n},          {"fc", f.fc},           {"speed", f.speed},
              {"trials", f.trials}, {"packet_us", packet_us}, {"threshold_db", threshold_db},
              {"points", samples},  {"seed", k.seed}};
  fading::PacketVariationOptions o;
  o.speed = f.speed;
  o.packet_duration = packet_us * 1e-6;
  o.good_threshold_db = threshold_db;
  o.n_trials = f.trials;
  o.points = samples;
  const auto pv = fading::within_packet_variation(spec, o, k.par());
  auto os = r.open("fig5_packet_variation.csv");
  csv::Writer w(os);
  w.comment("CCDF of max/min energy ratio within a packet; conditioned on initial energy > " +
            csv::db(threshold_db) + " dB (" + std::to_string(pv.conditioned.size()) + " of " +
            std::to_string(pv.all.size()) + " trials)");
  w.comment("p99_all_db=" + csv::db(pv.all.percentile(0.99)) +
            " p99_conditioned_db=" + csv::db(pv.conditioned.percentile(0.99)));
  w.header({"ratio_db", "ccdf_all", "ccdf_conditioned"});
  const double top = pv.all.sorted.empty() ? 1.0 : std::max(1.0, pv.all.percentile(0.999));
  for (int i = 0; i <= 200; ++i) {
    const double x = top * i / 200.0;
    w.row({csv::db(x), csv::prob(pv.all(x)), csv::prob(pv.conditioned(x))});
  }
}

// ---------------------------------------------------------------- predict

struct PredictFlags {
  double snr_db = 10.0;
  double past_ms = 3.0;
  double sample_ms = 1.0;
  double rate = 1.0;
  std::optional<double> threshold;
  FadingFlags fading;
};

void add_predict(CLI::App* c, PredictFlags& p, std::size_t default_trials) {
  add_fading(c, p.fading, default_trials);
  c->add_option("--speed", p.fading.speed, "Receiver speed [m/s]")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--snr-db", p.snr_db, "Nominal SNR [dB]")->capture_default_str();
  c->add_option("--past-ms", p.past_ms, "Observation window [ms]")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--sample-ms", p.sample_ms, "Sampling interval [ms]")->check(CLI::PositiveNumber)->capture_default_str();
  c->add_option("--rate", p.rate, "Spectral efficiency R for the (2^R-1)/SNR threshold")->capture_default_str();
  c->add_option("--threshold", p.threshold, "Explicit energy threshold (overrides --rate)");
}

predict::MispredictionOptions mis_options(const PredictFlags& p, const Common& k) {
  predict::MispredictionOptions o;
  o.snr_db = p.snr_db;
  o.rate = p.rate;
  o.threshold = p.threshold;
  o.sampling = {p.past_ms * 1e-3, p.sample_ms * 1e-3};
  o.speed = p.fading.speed;
  o.ensemble = ensemble(p.fading, k.seed);
  o.n_trials = p.fading.trials;
  return o;
}

json predict_config(const PredictFlags& p, const Common& k) {
  json j = {{"n", p.fading.n},           {"fc", p.fading.fc},     {"speed", p.fading.speed},
            {"trials", p.fading.trials}, {"snr_db", p.snr_db},    {"past_ms", p.past_ms},
            {"sample_ms", p.sample_ms},  {"rate", p.rate},        {"seed", k.seed}};
  j["threshold"] = p.threshold ? json(*p.threshold) : json(nullptr);
  return j;
}

predict::ObservationSet read_trace(const std::string& file, double speed, double wavelength) {
  std::ifstream is(file);
  if (!is) throw UsageError("--trace: cannot open '" + file + "'");
  predict::ObservationSet obs;
  obs.speed = speed;
  obs.wavelength = wavelength;
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      if (line.rfind("time_s,re,im", 0) != 0)
        throw UsageError("--trace: line " + std::to_string(lineno) + ": expected header time_s,re,im");
      continue;
    }
    std::stringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    std::getline(ss, c, ',');
    try {
      obs.times.push_back(std::stod(a));
      obs.coefficients.emplace_back(std::stod(b), std::stod(c));
    } catch (const std::exception&) {
      throw UsageError("--trace: line " + std::to_string(lineno) + ": malformed row");
    }
  }
  obs.validate();
  return obs;
}

void cmd_distribution(Run& r, const Common& k, const PredictFlags& p, const std::string& trace,
                      const std::string& horizons_s, std::size_t points) {
  const auto horizons = parse_list(horizons_s, "--horizons");
  auto spec = ensemble(p.fading, k.seed);
  const double lambda = spec.wavelength();
  r.config = predict_config(p, k);
  r.config["horizons"] = horizons;
  r.config["points"] = points;
  r.config["trace"] = trace;

  predict::ObservationSet obs;
  std::optional<fading::ChannelTrace> truth;
  std::vector<double> future_times;
  for (double h : horizons) future_times.push_back(h * lambda / p.fading.speed);
  if (!trace.empty()) {
    obs = read_trace(trace, p.fading.speed, lambda);
  } else {
    const auto past = predict::SamplingSpec{p.past_ms * 1e-3, p.sample_ms * 1e-3}.times();
    std::vector<double> all = past;
    for (double t : future_times)
      if (t > all.back()) all.push_back(t);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    const auto m = fading::ensemble_member(spec, 0, p.fading.speed * (all.back() - all.front()));
    const fading::Trajectory traj{m.rx.start, p.fading.speed, m.rx.heading};
    const fading::FieldEvaluator field(m.env);
    obs.speed = p.fading.speed;
    obs.wavelength = lambda;
    for (double t : past) {
      obs.times.push_back(t);
      obs.coefficients.push_back(field(traj.position(t - past.front())));
    }
    fading::ChannelTrace tr;
    for (double t : future_times) {
      tr.times.push_back(t);
      tr.coefficients.push_back(field(traj.position(t - past.front())));
    }
    truth = tr;
  }
  auto os = r.open("fig7b_prediction.csv");
  csv::Writer w(os);
  w.comment(trace.empty() ? "simulated trace, ensemble member 0" : "trace file " + trace);
  w.comment("columns: predictive CDF of |h(t_future)|^2 from " + std::to_string(obs.times.size()) +
            " past samples");
  w.header({"horizon_wavelengths", "nu", "sigma_c2", "true_energy", "energy", "cdf"});
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    const double tf = obs.times.back() + future_times[i];
    const auto pr = predict::predict(obs, tf);
    const std::string actual = truth ? csv::prob(std::norm(truth->coefficients[i])) : "n/a";
    const double hi = std::max(4.0, predict::energy_quantile(pr, 0.999));
    for (std::size_t j = 0; j < points; ++j) {
      const double x = hi * static_cast<double>(j) / static_cast<double>(points - 1);
      w.row({csv::num(horizons[i]), csv::num(pr.nu()), csv::num(pr.variance), actual,
             csv::num(x), csv::prob(predict::energy_cdf(pr, x))});
    }
  }
}

void cmd_misprediction(Run& r, const Common& k, const PredictFlags& p, double h_min, double h_max,
                       std::size_t points) {
  if (!(h_min > 0.0 && h_max > h_min)) throw UsageError("--h-min/--h-max: need 0 < h-min < h-max");
  r.config = predict_config(p, k);
  r.config["h_min"] = h_min;
  r.config["h_max"] = h_max;
  r.config["points"] = points;
  const auto o = mis_options(p, k);
  const auto curve = predict::misprediction_curve(o, predict::log_horizons(h_min, h_max, points), k.par());
  auto os = r.open("fig7a_misprediction.csv");
  csv::Writer w(os);
  w.comment("misprediction vs distance moved, snr_db=" + csv::db(p.snr_db) + " threshold=" +
            csv::prob(o.energy_threshold()) + " unconditional_outage=" +
            csv::prob(o.unconditional_outage()));
  w.header({"horizon_wavelengths", "misprediction", "ci_low", "ci_high", "errors", "trials",
            "interval90_coverage"});
  for (const auto& pt : curve)
    w.row({csv::num(pt.horizon_wavelengths), csv::prob(pt.rate()), csv::prob(pt.ci.low),
           csv::prob(pt.ci.high), csv::integer(static_cast<std::int64_t>(pt.errors)),
           csv::integer(static_cast<std::int64_t>(pt.trials)), csv::prob(pt.coverage)});
}

void cmd_coherence(Run& r, const Common& k, const PredictFlags& p, double reliability,
                   double max_wl) {
  r.config = predict_config(p, k);
  r.config["reliability"] = reliability;
  r.config["max_wavelengths"] = max_wl;
  const auto o = mis_options(p, k);
  json j = {{"reliability", reliability}, {"snr_db", p.snr_db}};
  try {
    const auto c = predict::coherence_distance(reliability, o, k.par(), max_wl);
    j["reachable"] = true;
    j["meters"] = c.meters;
    j["wavelengths"] = c.wavelengths;
    j["floor"] = c.floor;
    j["plateau"] = c.plateau;
    j["probes"] = c.probes;
  } catch (const UnreachableReliability& e) {
    j["reachable"] = false;
    j["error"] = e.what();
  }
  r.write_json("fig7a_coherence.json", j);
}

// ---------------------------------------------------------------- protocol

struct ProtocolFlags {
  std::string scheme = "occupy";
  int n = 10;
  double snr_db = 20.0;
  double poff = 0.0, pc = 0.0, pg = 0.0;
  int k1 = 1, k2 = 1;
  std::optional<int> cap;
  std::optional<double> q;
  std::string dynamics = "quasi-static";
  std::string refresh = "every-phase";
  double message_bits = 160.0;
  double cycle_ms = 2.0;
  double bandwidth_mhz = 20.0;
};

void add_cycle(CLI::App* c, ProtocolFlags& p) {
  c->add_option("--scheme", p.scheme, "occupy or xor")->capture_default_str();
  c->add_option("--poff", p.poff, "Fading-model slack p_off per link")->capture_default_str();
  c->add_option("--pc", p.pc, "Per-transmitter, per-slot corruption p_c")->capture_default_str();
  c->add_option("--pg", p.pg, "Per-receiver, per-slot corruption p_g")->capture_default_str();
  c->add_option("--message-bits", p.message_bits, "Message size m [bits]")->capture_default_str();
  c->add_option("--cycle-ms", p.cycle_ms, "Cycle time T [ms]")->capture_default_str();
  c->add_option("--bandwidth-mhz", p.bandwidth_mhz, "Bandwidth W [MHz]")->capture_default_str();
  c->add_option("--cap", p.cap, "Maximum number of relays");
}

protocol::ProtocolConfig to_config(const ProtocolFlags& p) {
  protocol::ProtocolConfig c;
  c.scheme = protocol::parse_scheme(p.scheme);
  c.n = p.n;
  c.k1 = p.k1;
  c.k2 = p.k2;
  c.cap = p.cap;
  c.q = p.q;
  c.dynamics = protocol::parse_dynamics(p.dynamics);
  c.refresh = protocol::parse_refresh(p.refresh);
  c.message_bits = p.message_bits;
  c.cycle_time = p.cycle_ms * 1e-3;
  c.bandwidth = p.bandwidth_mhz * 1e6;
  c.validate();
  return c;
}

protocol::UncertaintyBudget to_budget(const ProtocolFlags& p) {
  protocol::UncertaintyBudget b{p.poff, p.pc, p.pg};
  b.validate();
  return b;
}

json protocol_config(const ProtocolFlags& p, const Common& k) {
  return {{"scheme", p.scheme},   {"n", p.n},
          {"snr_db", p.snr_db},   {"poff", p.poff},
          {"pc", p.pc},           {"pg", p.pg},
          {"k1", p.k1},           {"k2", p.k2},
          {"cap", p.cap ? json(*p.cap) : json(nullptr)},
          {"q", p.q ? json(*p.q) : json(nullptr)},
          {"dynamics", p.dynamics}, {"refresh", p.refresh},
          {"message_bits", p.message_bits}, {"cycle_ms", p.cycle_ms},
          {"bandwidth_mhz", p.bandwidth_mhz}, {"seed", k.seed}};
}

json estimate_json(const oracle::OutageEstimate& e) {
  return {{"p_hat", e.p_hat},
          {"failures", e.failures},
          {"trials", e.trials},
          {"downlink_failures", e.downlink_failures},
          {"uplink_failures", e.uplink_failures},
          {"ci_low", e.ci95.low},
          {"ci_high", e.ci95.high}};
}

void cmd_outage(Run& r, const Common& k, const ProtocolFlags& p, std::uint64_t trials, bool mc) {
  const auto cfg = to_config(p);
  const auto budget = to_budget(p);
  r.config = protocol_config(p, k);
  r.config["trials"] = trials;
  r.config["validate_mc"] = mc;
  json j = {{"cycle_time_s", cfg.cycle_time}, {"scheme", p.scheme}, {"n", p.n},
            {"snr_db", p.snr_db}, {"dynamics", p.dynamics}};
  j["warnings"] = budget.warnings();
  const bool analytic = cfg.dynamics == protocol::Dynamics::QuasiStatic && !cfg.q;
  if (analytic) j["analytic"] = protocol::to_json(protocol::robust_cycle_outage(cfg, p.snr_db, budget));
  if (!analytic || mc) {
    const auto e = oracle::estimate_outage(cfg, p.snr_db, budget, trials, k.seed, k.par());
    j["monte_carlo"] = estimate_json(e);
    if (analytic) {
      const double a = j["analytic"]["p_fail"].get<double>();
      j["analytic_in_ci"] = a >= e.ci95.low && a <= e.ci95.high;
    }
  }
  r.write_json("fig6b_outage.json", j);
}

void cmd_tolerable(Run& r, double target, int n_min, int n_max) {
  if (!(target > 0.0 && target < 1.0)) throw UsageError("--target: must lie in (0, 1)");
  if (n_min < 1 || n_max < n_min) throw UsageError("--n-min/--n-max: need 1 <= n-min <= n-max");
  r.config = {{"target", target}, {"n_min", n_min}, {"n_max", n_max}};
  auto os = r.open("fig6a_tolerable_plink.csv");
  csv::Writer w(os);
  w.comment("largest i.i.d. link outage meeting target=" + csv::prob(target) +
            " under ideal two-hop relaying");
  w.header({"n", "max_plink"});
  for (int n = n_min; n <= n_max; ++n)
    w.row({csv::integer(n), csv::prob(protocol::max_tolerable_plink(n, target))});
}

json min_snr_json(const protocol::ProtocolConfig& cfg, const protocol::MinSnrResult& m) {
  json j = {{"n", cfg.n}, {"feasible", m.feasible}, {"cycle_time_s", cfg.cycle_time},
            {"message_bits", cfg.message_bits}, {"bandwidth_hz", cfg.bandwidth}};
  if (m.feasible) {
    j["snr_db"] = m.snr_db;
    j["k1"] = m.k1;
    j["k2"] = m.k2;
    j["p_fail"] = m.p_fail;
  }
  return j;
}

void cmd_min_snr(Run& r, const Common& k, ProtocolFlags p, double target, std::optional<int> n_min,
                 std::optional<int> n_max, bool n_given) {
  if (!(target > 0.0 && target < 1.0)) throw UsageError("--target: must lie in (0, 1)");
  const bool range = n_min || n_max;
  if (range && n_given) throw UsageError("--n: cannot be combined with --n-min/--n-max");
  if (range && !(n_min && n_max && *n_min >= 1 && *n_max >= *n_min))
    throw UsageError("--n-min/--n-max: both required with 1 <= n-min <= n-max");
  const auto budget = to_budget(p);
  r.config = protocol_config(p, k);
  r.config.erase("snr_db");
  r.config.erase("k1");
  r.config.erase("k2");
  r.config["target"] = target;
  r.config["n_min"] = n_min ? json(*n_min) : json(nullptr);
  r.config["n_max"] = n_max ? json(*n_max) : json(nullptr);
  if (!range) {
    const auto cfg = to_config(p);
    r.write_json("fig8_min_snr.json", min_snr_json(cfg, protocol::min_snr(cfg, budget, target)));
    return;
  }
  auto os = r.open("fig8_min_snr.csv");
  csv::Writer w(os);
  w.comment("minimum SNR meeting target=" + csv::prob(target) + ", cycle_time_s=" +
            csv::num(p.cycle_ms * 1e-3) + ", annotated with the chosen k1 and k2");
  w.header({"n", "feasible", "snr_db", "k1", "k2", "p_fail"});
  for (int n = *n_min; n <= *n_max; ++n) {
    p.n = n;
    const auto cfg = to_config(p);
    const auto m = protocol::min_snr(cfg, budget, target);
    if (m.feasible)
      w.row({csv::integer(n), "true", csv::db(m.snr_db), csv::integer(m.k1), csv::integer(m.k2),
             csv::prob(m.p_fail)});
    else
      w.row({csv::integer(n), "false", "n/a", "n/a", "n/a", "n/a"});
  }
}

void cmd_sweep(Run& r, const Common& k, const std::string& file, bool mc, std::optional<std::uint64_t> seed_override) {
  std::ifstream is(file);
  if (!is) throw UsageError("scenario: cannot open '" + file + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  auto sc = oracle::parse_scenario(ss.str());
  if (seed_override) sc.seed = *seed_override;
  r.config = json::parse(ss.str());
  r.config["seed"] = sc.seed;
  r.config["validate_mc"] = mc;
  auto os = r.open("fig9_sweep.csv");
  csv::Writer w(os);
  w.comment("scenario " + fs::path(file).filename().string() + ", " +
            std::to_string(sc.points.size()) + " points");
  w.header(oracle::sweep_header(mc));
  oracle::run_sweep(sc, mc, [&](const oracle::SweepRow& row) {
    w.row(oracle::sweep_cells(row, mc));
    w.flush();
  }, k.par());
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  CLI::App app{"urllc_lab: wireless-control reliability experiments"};
  app.set_version_flag("--version", std::string(URLLC_VERSION));
  app.require_subcommand(1);

  Common common;
  std::function<void(Run&)> action;
  std::string stem;
  bool seed_given = false;

  auto fading = app.add_subcommand("fading", "Scatterer fading engine");
  fading->require_subcommand(1);
  auto predict = app.add_subcommand("predict", "Gaussian-process channel prediction");
  predict->require_subcommand(1);
  auto protocol = app.add_subcommand("protocol", "Relay protocol outage");
  protocol->require_subcommand(1);

  // fading
  FadingFlags ff_cdf, ff_cov, ff_psd, ff_bw, ff_pv;
  std::size_t cdf_points = 101, cov_points = 41;
  double cov_max = 1.0;
  auto c_cdf = fading->add_subcommand("cdf", "Fig. 1b: energy CDF vs Rayleigh");
  add_fading(c_cdf, ff_cdf, 100000);
  c_cdf->add_option("--points", cdf_points, "Grid points")->check(CLI::Range(2u, 100000u));
  c_cdf->callback([&] { stem = "fading_cdf"; action = [&](Run& r) { cmd_cdf(r, common, ff_cdf, cdf_points); }; });

  auto c_cov = fading->add_subcommand("covariance", "Fig. 3a: temporal covariance vs J0");
  add_fading(c_cov, ff_cov, 10000);
  c_cov->add_option("--speed", ff_cov.speed, "Receiver speed [m/s]")->check(CLI::PositiveNumber);
  c_cov->add_option("--points", cov_points, "Lag points")->check(CLI::Range(2u, 100000u));
  c_cov->add_option("--max-wavelengths", cov_max, "Largest lag as distance in wavelengths")->check(CLI::PositiveNumber);
  c_cov->callback([&] {
    stem = "fading_covariance";
    action = [&](Run& r) { cmd_covariance(r, common, ff_cov, cov_points, cov_max); };
  });

  PsdFlags pf;
  auto c_psd = fading->add_subcommand("psd", "Fig. 3b: spatial power spectral density");
  add_fading(c_psd, ff_psd, 100);
  c_psd->add_option("--speed", ff_psd.speed, "Receiver speed [m/s]")->check(CLI::PositiveNumber);
  c_psd->add_option("--duration", pf.duration, "Trace length [s]")->check(CLI::PositiveNumber);
  c_psd->add_option("--sample-rate", pf.sample_rate, "Samples per second")->check(CLI::PositiveNumber);
  c_psd->add_option("--window", pf.window, "hann or rect")->capture_default_str();
  c_psd->add_option("--segment", pf.segment, "Welch segment length (0: half the trace)");
  c_psd->callback([&] { stem = "fading_psd"; action = [&](Run& r) { cmd_psd(r, common, ff_psd, pf); }; });

  std::string speeds = "5,10,20", fractions = "0.99,0.999,0.9999";
  double path_m = 10.0, per_wl = 40.0;
  auto c_bw = fading->add_subcommand("bandwidth", "Figs. 4a/4b: energy bandwidth vs speed and fraction");
  add_fading(c_bw, ff_bw, 100);
  c_bw->add_option("--speeds", speeds, "Comma-separated speeds [m/s]")->capture_default_str();
  c_bw->add_option("--fractions", fractions, "Comma-separated energy fractions")->capture_default_str();
  c_bw->add_option("--path-m", path_m, "Trace length [m]")->check(CLI::PositiveNumber);
  c_bw->add_option("--samples-per-wavelength", per_wl, "Spatial sampling density")->check(CLI::PositiveNumber);
  c_bw->add_option("--window", pf.window, "hann or rect")->capture_default_str();
  c_bw->callback([&] {
    stem = "fading_bandwidth";
    action = [&](Run& r) { cmd_bandwidth(r, common, ff_bw, speeds, fractions, path_m, per_wl, pf.window); };
  });

  double packet_us = 50.0, threshold_db = -7.0;
  std::size_t packet_points = 50;
  auto c_pv = fading->add_subcommand("packet-variation", "Fig. 5: within-packet energy variation");
  add_fading(c_pv, ff_pv, 10000);
  c_pv->add_option("--speed", ff_pv.speed, "Receiver speed [m/s]")->check(CLI::NonNegativeNumber);
  c_pv->add_option("--packet-us", packet_us, "Packet duration [us]")->check(CLI::PositiveNumber);
  c_pv->add_option("--threshold-db", threshold_db, "Initial-energy condition [dB]");
  c_pv->add_option("--points", packet_points, "Samples per packet")->check(CLI::Range(2u, 100000u));
  c_pv->callback([&] {
    stem = "fading_packet_variation";
    action = [&](Run& r) { cmd_packet(r, common, ff_pv, packet_us, threshold_db, packet_points); };
  });

  // predict
  PredictFlags pp_dist, pp_mis, pp_coh;
  std::string trace, horizons = "0.01,0.05,0.1,0.25,0.5";
  std::size_t dist_points = 101, mis_points = 31;
  double h_min = 1e-3, h_max = 1.0, reliability = 0.0, coh_max = 1.0;
  auto c_dist = predict->add_subcommand("distribution", "Fig. 7b: predicted energy distribution");
  add_predict(c_dist, pp_dist, 1);
  c_dist->add_option("--trace", trace, "CSV trace (time_s,re,im) instead of a simulated one")->check(CLI::ExistingFile);
  c_dist->add_option("--horizons", horizons, "Comma-separated horizons [wavelengths]")->capture_default_str();
  c_dist->add_option("--points", dist_points, "Energy grid points")->check(CLI::Range(2u, 100000u));
  c_dist->callback([&] {
    stem = "predict_distribution";
    action = [&](Run& r) { cmd_distribution(r, common, pp_dist, trace, horizons, dist_points); };
  });

  auto c_mis = predict->add_subcommand("misprediction", "Fig. 7a: misprediction vs distance moved");
  add_predict(c_mis, pp_mis, 100000);
  c_mis->add_option("--h-min", h_min, "Smallest horizon [wavelengths]");
  c_mis->add_option("--h-max", h_max, "Largest horizon [wavelengths]");
  c_mis->add_option("--points", mis_points, "Horizon count")->check(CLI::Range(1u, 10000u));
  c_mis->callback([&] {
    stem = "predict_misprediction";
    action = [&](Run& r) { cmd_misprediction(r, common, pp_mis, h_min, h_max, mis_points); };
  });

  auto c_coh = predict->add_subcommand("coherence", "Fig. 7a: reliability-based coherence distance");
  add_predict(c_coh, pp_coh, 100000);
  c_coh->add_option("--reliability", reliability, "Target misprediction probability")
      ->required()
      ->check(CLI::Range(0.0, 1.0));
  c_coh->add_option("--max-wavelengths", coh_max, "Search limit [wavelengths]")->check(CLI::PositiveNumber);
  c_coh->callback([&] {
    stem = "predict_coherence";
    action = [&](Run& r) { cmd_coherence(r, common, pp_coh, reliability, coh_max); };
  });

  // protocol
  ProtocolFlags prf;
  std::uint64_t trials = 100000;
  bool validate_mc = false;
  auto c_out = protocol->add_subcommand("outage", "Figs. 6b/9: cycle outage for one configuration");
  add_cycle(c_out, prf);
  c_out->add_option("--n", prf.n, "Nodes including the controller")->capture_default_str();
  c_out->add_option("--snr-db", prf.snr_db, "Nominal SNR [dB]")->capture_default_str();
  c_out->add_option("--k1", prf.k1, "Downlink repetitions")->capture_default_str();
  c_out->add_option("--k2", prf.k2, "Relay repetitions")->capture_default_str();
  c_out->add_option("--q", prf.q, "Pessimistic link-correlation weight");
  c_out->add_option("--dynamics", prf.dynamics, "quasi-static or phase-refresh")->capture_default_str();
  c_out->add_option("--refresh", prf.refresh, "every-phase or dl-ul")->capture_default_str();
  c_out->add_option("--trials", trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  c_out->add_flag("--validate-mc", validate_mc, "Also run the Monte Carlo oracle");
  c_out->callback([&] {
    stem = "protocol_outage";
    action = [&](Run& r) { cmd_outage(r, common, prf, trials, validate_mc); };
  });

  double target = 1e-9;
  int n_min = 2, n_max = 50;
  auto c_tol = protocol->add_subcommand("tolerable-plink", "Fig. 6a: largest tolerable link outage vs n");
  c_tol->add_option("--target", target, "Cycle outage target")->capture_default_str();
  c_tol->add_option("--n-min", n_min, "Smallest n")->capture_default_str();
  c_tol->add_option("--n-max", n_max, "Largest n")->capture_default_str();
  c_tol->callback([&] {
    stem = "protocol_tolerable_plink";
    action = [&](Run& r) { cmd_tolerable(r, target, n_min, n_max); };
  });

  std::optional<int> ms_min, ms_max;
  auto c_ms = protocol->add_subcommand("min-snr", "Fig. 8: minimum SNR with chosen k1, k2");
  add_cycle(c_ms, prf);
  auto n_opt = c_ms->add_option("--n", prf.n, "Nodes (single point, JSON output)");
  c_ms->add_option("--n-min", ms_min, "Range start (CSV output)");
  c_ms->add_option("--n-max", ms_max, "Range end (CSV output)");
  c_ms->add_option("--target", target, "Cycle outage target")->capture_default_str();
  c_ms->callback([&] {
    stem = "protocol_min_snr";
    const bool given = n_opt->count() > 0;
    action = [&, given](Run& r) { cmd_min_snr(r, common, prf, target, ms_min, ms_max, given); };
  });

  std::string scenario;
  auto c_sw = protocol->add_subcommand("sweep", "Figs. 9a-9c: scenario grid via the Monte Carlo oracle");
  c_sw->add_option("scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  c_sw->add_flag("--validate-mc", validate_mc, "Add analytic values and CI agreement flags");
  c_sw->callback([&] {
    stem = "protocol_sweep";
    action = [&](Run& r) {
      cmd_sweep(r, common, scenario, validate_mc,
                seed_given ? std::optional<std::uint64_t>(common.seed) : std::nullopt);
    };
  });

  for (auto* c : {c_cdf, c_cov, c_psd, c_bw, c_pv, c_dist, c_mis, c_coh, c_out, c_tol, c_ms, c_sw})
    add_common(c, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  for (auto* c : {c_cdf, c_cov, c_psd, c_bw, c_pv, c_dist, c_mis, c_coh, c_out, c_tol, c_ms, c_sw})
    if (c->parsed() && c->get_option("--seed")->count() > 0) seed_given = true;
  if (const char* env = std::getenv("URLLC_LAB_SEED")) {
    try {
      std::size_t used = 0;
      common.seed = std::stoull(env, &used);
      if (used != std::string_view(env).size()) throw std::invalid_argument(env);
      seed_given = true;
    } catch (const std::exception&) {
      std::cerr << "error: URLLC_LAB_SEED: '" << env << "' is not an unsigned integer\n";
      return 2;
    }
  }

  Run run;
  run.dir = common.out_dir;
  for (const auto* p = app.get_subcommands().front(); p; ) {
    run.command += (run.command.empty() ? "" : " ") + p->get_name();
    const auto subs = p->get_subcommands();
    p = subs.empty() ? nullptr : subs.front();
  }
  try {
    fs::create_directories(run.dir);
    const auto t0 = std::chrono::steady_clock::now();
    action(run);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(run, args, wall, stem);
    for (const auto& o : run.outputs) std::cout << (run.dir / o).string() << '\n';
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
