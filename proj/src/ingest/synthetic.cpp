#include "lobster/ingest/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "lobster/common/error.hpp"
#include "lobster/common/rng.hpp"

namespace lobster::ingest {
namespace {

struct IndividualTraits {
  double center_scale = 1.0;
  double gain = 1.0;
};

void add_burst(std::vector<double>& out, const ClassProfile& p, const IndividualTraits& who,
               int sample_rate, Rng& rng) {
  const std::size_t len = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::lround(p.burst_duration_s * sample_rate)));
  if (len > out.size()) return;
  const std::size_t start = rng.below(out.size() - len + 1);
  const double nyquist = 0.5 * sample_rate;
  const double center = p.center_hz * who.center_scale;

  std::vector<double> freq(static_cast<std::size_t>(p.n_tones));
  std::vector<double> phase(freq.size());
  for (std::size_t t = 0; t < freq.size(); ++t) {
    const double f = center + (rng.uniform() - 0.5) * p.bandwidth_hz;
    freq[t] = std::clamp(f, 1.0, nyquist - 1.0);
    phase[t] = 2.0 * std::numbers::pi * rng.uniform();
  }
  const double amp = p.burst_amplitude * who.gain / std::sqrt(static_cast<double>(freq.size()));
  for (std::size_t n = 0; n < len; ++n) {
    const double env = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / (len - 1));
    const double time = static_cast<double>(n) / sample_rate;
    double v = 0.0;
    for (std::size_t t = 0; t < freq.size(); ++t) {
      v += std::sin(2.0 * std::numbers::pi * freq[t] * time + phase[t]);
    }
    out[start + n] += amp * env * v;
  }
}

std::string individual_name(const ClassProfile& p, int k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d", k + 1);
  return p.name + "-" + buf;
}

}  // namespace

ClassProfile buzz_profile(std::string name, Sex sex, Age age, double center_hz) {
  ClassProfile p;
  p.name = std::move(name);
  p.sex = sex;
  p.age = age;
  p.center_hz = center_hz;
  p.bandwidth_hz = 40.0;
  p.burst_rate = 3.0;
  p.burst_amplitude = 0.3;
  p.burst_duration_s = 0.25;
  p.silence_fraction = 0.1;
  return p;
}

ClassProfile click_profile(std::string name, Sex sex, Age age, double center_hz) {
  ClassProfile p;
  p.name = std::move(name);
  p.sex = sex;
  p.age = age;
  p.center_hz = center_hz;
  p.bandwidth_hz = 3000.0;
  p.burst_rate = 12.0;
  p.burst_amplitude = 0.5;
  p.burst_duration_s = 0.004;
  p.silence_fraction = 0.1;
  return p;
}

SyntheticSpec default_synthetic_spec() {
  SyntheticSpec spec;
  spec.profiles = {
      buzz_profile("AM", Sex::kMale, Age::kAdult, 130.0),
      buzz_profile("AF", Sex::kFemale, Age::kAdult, 190.0),
      click_profile("JM", Sex::kMale, Age::kJuvenile, 2500.0),
      click_profile("JF", Sex::kFemale, Age::kJuvenile, 5000.0),
  };
  return spec;
}

void validate(const SyntheticSpec& spec) {
  if (spec.profiles.size() < 2) throw ValidationError("synthetic spec needs at least 2 profiles");
  if (spec.n_per_class == 0) throw ValidationError("n_per_class must be positive");
  if (spec.sample_rate <= 0) throw ValidationError("sample_rate must be positive");
  if (spec.individuals_per_profile < 1) {
    throw ValidationError("individuals_per_profile must be at least 1");
  }
  std::set<std::string> names;
  for (const auto& p : spec.profiles) {
    if (!names.insert(p.name).second) {
      throw ValidationError("duplicate profile name '" + p.name + "'");
    }
    if (!(p.bandwidth_hz > 0.0)) {
      throw ValidationError("profile '" + p.name + "': bandwidth must be positive");
    }
    if (!(p.center_hz > 0.0) || p.center_hz >= 0.5 * spec.sample_rate) {
      throw ValidationError("profile '" + p.name + "': centre frequency outside (0, Nyquist)");
    }
    if (p.burst_rate < 0.0 || p.noise_floor < 0.0 || p.burst_amplitude < 0.0) {
      throw ValidationError("profile '" + p.name + "': negative rate, noise or amplitude");
    }
    if (!(p.burst_duration_s > 0.0) || p.burst_duration_s > 1.0) {
      throw ValidationError("profile '" + p.name + "': burst duration must be in (0, 1] s");
    }
    if (p.silence_fraction < 0.0 || p.silence_fraction > 1.0) {
      throw ValidationError("profile '" + p.name + "': silence_fraction outside [0, 1]");
    }
    if (p.n_tones < 1) throw ValidationError("profile '" + p.name + "': n_tones must be >= 1");
  }
}

std::vector<AudioSegment> generate_synthetic_dataset(const SyntheticSpec& spec) {
  validate(spec);
  const Rng master(spec.seed);
  const auto window = static_cast<std::size_t>(spec.sample_rate);

  std::vector<AudioSegment> segments;
  segments.reserve(spec.profiles.size() * spec.n_per_class);
  for (std::size_t pi = 0; pi < spec.profiles.size(); ++pi) {
    const auto& profile = spec.profiles[pi];

    std::vector<IndividualTraits> traits(static_cast<std::size_t>(spec.individuals_per_profile));
    Rng trait_rng = master.split(1'000'000ULL * (pi + 1));
    for (auto& t : traits) {
      t.center_scale = 1.0 + spec.individual_jitter * (2.0 * trait_rng.uniform() - 1.0);
      const double gain_db = spec.individual_gain_db * (2.0 * trait_rng.uniform() - 1.0);
      t.gain = std::pow(10.0, gain_db / 20.0);
    }

    for (std::size_t j = 0; j < spec.n_per_class; ++j) {
      const int who = static_cast<int>(j % traits.size());
      Rng rng = master.split(1'000'000ULL * (pi + 1) + j + 1);

      AudioSegment seg;
      seg.sample_rate = spec.sample_rate;
      seg.labels = {individual_name(profile, who), profile.sex, profile.age};
      seg.source_offset = (j / traits.size()) * window;
      seg.samples.assign(window, 0.0);
      if (profile.noise_floor > 0.0) {
        for (auto& v : seg.samples) v = profile.noise_floor * rng.normal();
      }
      const bool silent = rng.uniform() < profile.silence_fraction;
      if (!silent && profile.burst_rate > 0.0 && profile.burst_amplitude > 0.0) {
        const std::size_t bursts = std::max<std::size_t>(1, rng.poisson(profile.burst_rate));
        for (std::size_t b = 0; b < bursts; ++b) {
          add_burst(seg.samples, profile, traits[static_cast<std::size_t>(who)], spec.sample_rate,
                    rng);
        }
      }
      for (auto& v : seg.samples) v = std::clamp(v, -1.0, 1.0);
      segments.push_back(std::move(seg));
    }
  }
  return segments;
}

namespace {

template <typename T>
void take(const nlohmann::json& node, const char* key, T& out) {
  if (node.contains(key)) out = node.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& node, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : node.items()) {
    if (!known.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& node) {
  if (!node.is_object()) throw ValidationError("synthetic spec must be a JSON object");
  reject_unknown(node,
                 {"seed", "n_per_class", "sample_rate", "individuals_per_profile",
                  "individual_jitter", "individual_gain_db", "profiles"},
                 "synthetic spec");
  SyntheticSpec spec = default_synthetic_spec();
  try {
    take(node, "seed", spec.seed);
    take(node, "n_per_class", spec.n_per_class);
    take(node, "sample_rate", spec.sample_rate);
    take(node, "individuals_per_profile", spec.individuals_per_profile);
    take(node, "individual_jitter", spec.individual_jitter);
    take(node, "individual_gain_db", spec.individual_gain_db);
    if (node.contains("profiles")) {
      spec.profiles.clear();
      for (const auto& pn : node.at("profiles")) {
        reject_unknown(pn,
                       {"name", "sex", "age", "center_hz", "bandwidth_hz", "burst_rate",
                        "noise_floor", "burst_amplitude", "burst_duration_s",
                        "silence_fraction", "n_tones"},
                       "synthetic profile");
        ClassProfile p;
        p.name = pn.at("name").get<std::string>();
        p.sex = parse_sex(pn.at("sex").get<std::string>());
        p.age = parse_age(pn.at("age").get<std::string>());
        take(pn, "center_hz", p.center_hz);
        take(pn, "bandwidth_hz", p.bandwidth_hz);
        take(pn, "burst_rate", p.burst_rate);
        take(pn, "noise_floor", p.noise_floor);
        take(pn, "burst_amplitude", p.burst_amplitude);
        take(pn, "burst_duration_s", p.burst_duration_s);
        take(pn, "silence_fraction", p.silence_fraction);
        take(pn, "n_tones", p.n_tones);
        spec.profiles.push_back(std::move(p));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synthetic spec: ") + e.what());
  }
  validate(spec);
  return spec;
}

nlohmann::json to_json(const SyntheticSpec& spec) {
  nlohmann::json profiles = nlohmann::json::array();
  for (const auto& p : spec.profiles) {
    profiles.push_back({{"name", p.name},
                        {"sex", to_string(p.sex)},
                        {"age", to_string(p.age)},
                        {"center_hz", p.center_hz},
                        {"bandwidth_hz", p.bandwidth_hz},
                        {"burst_rate", p.burst_rate},
                        {"noise_floor", p.noise_floor},
                        {"burst_amplitude", p.burst_amplitude},
                        {"burst_duration_s", p.burst_duration_s},
                        {"silence_fraction", p.silence_fraction},
                        {"n_tones", p.n_tones}});
  }
  return {{"seed", spec.seed},
          {"n_per_class", spec.n_per_class},
          {"sample_rate", spec.sample_rate},
          {"individuals_per_profile", spec.individuals_per_profile},
          {"individual_jitter", spec.individual_jitter},
          {"individual_gain_db", spec.individual_gain_db},
          {"profiles", profiles}};
}

}  // namespace lobster::ingest
