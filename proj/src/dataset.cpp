#include "gwad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "gwad/binio.hpp"
#include "gwad/rng.hpp"
#include "gwad/textio.hpp"

namespace gwad::data {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Five-cycle Hann-windowed tone burst starting at t0, unit amplitude.
void add_burst(std::vector<double>& samples, double sample_rate, double t0, double freq,
               double amplitude) {
    const double duration = kBurstCycles / freq;
    const long i0 = static_cast<long>(std::ceil(t0 * sample_rate));
    const long i1 = static_cast<long>(std::floor((t0 + duration) * sample_rate));
    const long n = static_cast<long>(samples.size());
    for (long i = std::max(0L, i0); i <= std::min(n - 1, i1); ++i) {
        const double t = static_cast<double>(i) / sample_rate - t0;
        const double w = 0.5 * (1.0 - std::cos(kTwoPi * t / duration));
        samples[static_cast<std::size_t>(i)] += amplitude * w * std::sin(kTwoPi * freq * t);
    }
}

std::string make_id(const std::string& prefix, Label label, int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", index);
    return prefix + (label == Label::Damage ? "d" : "b") + buf;
}

}  // namespace

std::vector<double> default_excitation_freqs() {
    std::vector<double> freqs(12);
    for (int i = 0; i < 12; ++i) freqs[static_cast<std::size_t>(i)] = 40e3 + 20e3 * i;
    return freqs;
}

Dataset synthesize(const SynthConfig& config) {
    if (config.n_baseline < 0 || config.n_damage < 0)
        throw InvalidConfig("signal counts must be >= 0");
    if (config.n_baseline + config.n_damage < 1)
        throw InvalidConfig("at least one signal must be requested");
    if (config.n_samples < 16) throw InvalidConfig("n_samples must be >= 16");
    if (!(config.sample_rate > 0.0)) throw InvalidConfig("sample_rate must be > 0");
    if (config.noise_sigma < 0.0) throw InvalidConfig("noise_sigma must be >= 0");
    if (config.damage_echo_amplitude < 0.0)
        throw InvalidConfig("damage_echo_amplitude must be >= 0");
    if (config.damage_attenuation < 0.0 || config.damage_attenuation >= 1.0)
        throw InvalidConfig("damage_attenuation must be in [0, 1)");
    if (config.damage_echo_delay < 0.0) throw InvalidConfig("damage_echo_delay must be >= 0");

    std::vector<double> freqs =
        config.excitation_freqs.empty() ? default_excitation_freqs() : config.excitation_freqs;
    for (double f : freqs)
        if (!(f > 0.0) || !(f < config.sample_rate / 2.0))
            throw InvalidConfig("excitation frequency outside (0, sample_rate/2)");

    Dataset ds;
    ds.sample_rate = config.sample_rate;
    ds.metadata["generator"] = "tone-burst";
    ds.metadata["seed"] = std::to_string(config.seed);
    ds.signals.reserve(static_cast<std::size_t>(config.n_baseline + config.n_damage));

    Rng rng(config.seed);
    const int total = config.n_baseline + config.n_damage;
    for (int idx = 0; idx < total; ++idx) {
        const bool damaged = idx >= config.n_baseline;
        Signal sig;
        sig.sample_rate = config.sample_rate;
        sig.label = damaged ? Label::Damage : Label::Baseline;
        sig.id = make_id(config.id_prefix, sig.label,
                         damaged ? idx - config.n_baseline : idx);
        sig.samples.assign(static_cast<std::size_t>(config.n_samples), 0.0);

        const double freq = freqs[static_cast<std::size_t>(rng.below(freqs.size()))];
        const double direct = damaged ? 1.0 - config.damage_attenuation : 1.0;

        add_burst(sig.samples, config.sample_rate, kBurstStart, freq, direct);
        add_burst(sig.samples, config.sample_rate, kBurstStart + kBoundaryEchoDelay, freq,
                  kBoundaryEchoAmplitude * direct);
        if (damaged)
            add_burst(sig.samples, config.sample_rate, kBurstStart + config.damage_echo_delay,
                      freq, config.damage_echo_amplitude * direct);
        if (config.noise_sigma > 0.0)
            for (auto& v : sig.samples) v += config.noise_sigma * rng.gaussian();

        ds.signals.push_back(std::move(sig));
    }
    return ds;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
    if (dataset.signals.empty()) throw InvalidConfig("save_dataset: dataset is empty");
    const std::size_t n_samples = dataset.signals.front().samples.size();
    for (const auto& s : dataset.signals)
        if (s.samples.size() != n_samples)
            throw LengthMismatch("save_dataset: signals have differing lengths");

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    binio::write_magic(os, "GWS1");
    binio::write_u32(os, 1);
    binio::write_u32(os, static_cast<std::uint32_t>(dataset.signals.size()));
    binio::write_u32(os, static_cast<std::uint32_t>(n_samples));
    binio::write_f32(os, static_cast<float>(dataset.sample_rate));
    for (const auto& s : dataset.signals) {
        binio::write_u8(os, static_cast<std::uint8_t>(s.label));
        if (s.id.size() > 0xffff) throw InvalidConfig("signal id too long");
        binio::write_u16(os, static_cast<std::uint16_t>(s.id.size()));
        binio::put_bytes(os, s.id.data(), s.id.size());
        for (double v : s.samples) binio::write_f32(os, static_cast<float>(v));
    }
    if (!os) throw std::runtime_error("failed writing " + path);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    binio::expect_magic(is, "GWS1", path);
    const std::uint32_t version = binio::read_u32(is);
    if (version != 1) throw BadMagic("unsupported GWS1 version in " + path);
    const std::uint32_t n_signals = binio::read_u32(is);
    const std::uint32_t n_samples = binio::read_u32(is);
    const float rate = binio::read_f32(is);

    Dataset ds;
    ds.sample_rate = rate;
    ds.signals.reserve(n_signals);
    for (std::uint32_t i = 0; i < n_signals; ++i) {
        Signal sig;
        sig.sample_rate = rate;
        const std::uint8_t label = binio::read_u8(is);
        if (label > 2) throw BadMagic("invalid label byte in " + path);
        sig.label = static_cast<Label>(label);
        const std::uint16_t id_len = binio::read_u16(is);
        sig.id.resize(id_len);
        binio::get_bytes(is, sig.id.data(), id_len);
        sig.samples.resize(n_samples);
        for (auto& v : sig.samples) v = binio::read_f32(is);
        ds.signals.push_back(std::move(sig));
    }
    return ds;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec) {
    if (spec.n_train_baseline < 0 || spec.n_test_baseline < 0 || spec.n_test_damage < 0)
        throw InvalidConfig("split counts must be >= 0");

    std::vector<std::size_t> baseline_idx, damage_idx;
    for (std::size_t i = 0; i < dataset.signals.size(); ++i) {
        if (dataset.signals[i].label == Label::Baseline) baseline_idx.push_back(i);
        else if (dataset.signals[i].label == Label::Damage) damage_idx.push_back(i);
    }
    const std::size_t need_baseline =
        static_cast<std::size_t>(spec.n_train_baseline) + spec.n_test_baseline;
    if (baseline_idx.size() < need_baseline)
        throw InsufficientSamples("split: need " + std::to_string(need_baseline) +
                                  " baseline signals, have " +
                                  std::to_string(baseline_idx.size()));
    if (damage_idx.size() < static_cast<std::size_t>(spec.n_test_damage))
        throw InsufficientSamples("split: need " + std::to_string(spec.n_test_damage) +
                                  " damage signals, have " +
                                  std::to_string(damage_idx.size()));

    Rng rng(spec.seed);
    rng.shuffle(baseline_idx);
    rng.shuffle(damage_idx);

    Dataset train, test;
    train.sample_rate = test.sample_rate = dataset.sample_rate;
    train.metadata = test.metadata = dataset.metadata;
    for (int i = 0; i < spec.n_train_baseline; ++i)
        train.signals.push_back(dataset.signals[baseline_idx[static_cast<std::size_t>(i)]]);
    for (int i = 0; i < spec.n_test_baseline; ++i)
        test.signals.push_back(
            dataset.signals[baseline_idx[static_cast<std::size_t>(spec.n_train_baseline + i)]]);
    for (int i = 0; i < spec.n_test_damage; ++i)
        test.signals.push_back(dataset.signals[damage_idx[static_cast<std::size_t>(i)]]);
    return {std::move(train), std::move(test)};
}

Dataset import_csv(const std::string& path, double sample_rate, Label label) {
    if (!(sample_rate > 0.0)) throw InvalidConfig("import_csv: sample_rate must be > 0");
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);

    Dataset ds;
    ds.sample_rate = sample_rate;
    std::string line;
    std::size_t row = 0;
    std::size_t expected_cols = 0;
    while (std::getline(is, line)) {
        ++row;
        if (textio::strip(line).empty()) continue;
        const auto cells = textio::split(line, ',');
        if (expected_cols == 0) {
            expected_cols = cells.size();
        } else if (cells.size() != expected_cols) {
            throw RaggedRows("import_csv: row " + std::to_string(row) + " has " +
                             std::to_string(cells.size()) + " columns, expected " +
                             std::to_string(expected_cols));
        }
        Signal sig;
        sig.sample_rate = sample_rate;
        sig.label = label;
        sig.id = "csv" + std::to_string(ds.signals.size());
        sig.samples.reserve(cells.size());
        for (std::size_t col = 0; col < cells.size(); ++col) {
            double v = 0.0;
            if (!textio::parse_double(cells[col], v))
                throw ParseError("import_csv: invalid float '" + textio::strip(cells[col]) + "'",
                                 row, col + 1);
            sig.samples.push_back(v);
        }
        ds.signals.push_back(std::move(sig));
    }
    return ds;
}

}  // namespace gwad::data
