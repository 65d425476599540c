#ifndef GWAD_DATASET_HPP
#define GWAD_DATASET_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gwad/signal.hpp"

namespace gwad::data {

using signal::Label;
using signal::Signal;

struct InvalidConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LengthMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientSamples : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RaggedRows : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    std::size_t row = 0, column = 0;  // 1-based
    ParseError(const std::string& msg, std::size_t r, std::size_t c)
        : std::runtime_error(msg + " at row " + std::to_string(r) + ", column " +
                             std::to_string(c)),
          row(r),
          column(c) {}
};

struct Dataset {
    std::vector<Signal> signals;
    double sample_rate = 0.0;
    std::map<std::string, std::string> metadata;
};

// Synthetic stand-in corpus: Hann-windowed five-cycle tone bursts with a
// fixed boundary echo, Gaussian noise, and for the damage class an extra
// scattered echo plus direct-burst attenuation.
struct SynthConfig {
    int n_baseline = 0;
    int n_damage = 0;
    int n_samples = 2048;
    double sample_rate = 1e6;                 // Hz
    std::vector<double> excitation_freqs;     // empty -> 12 values over 40..260 kHz
    double noise_sigma = 0.02;
    double damage_echo_delay = 2.5e-4;        // s, after the direct burst
    double damage_echo_amplitude = 0.9;       // relative to the direct burst
    double damage_attenuation = 0.1;          // fraction removed from the direct burst
    std::uint64_t seed = 0;
    std::string id_prefix;
};

// Burst placement and boundary echo are fixed properties of the generator.
constexpr double kBurstStart = 1.0e-4;          // s
constexpr double kBurstCycles = 5.0;
constexpr double kBoundaryEchoDelay = 5.0e-4;   // s, after the direct burst
constexpr double kBoundaryEchoAmplitude = 0.4;  // relative to the direct burst

std::vector<double> default_excitation_freqs();

Dataset synthesize(const SynthConfig& config);

// GWS1 (little-endian): magic "GWS1", u32 version=1, u32 n_signals,
// u32 n_samples, f32 sample_rate_hz, then per signal: u8 label,
// u16 id length + UTF-8 id, n_samples x f32 samples.
void save_dataset(const Dataset& dataset, const std::string& path);
Dataset load_dataset(const std::string& path);

struct SplitSpec {
    int n_train_baseline = 0;
    int n_test_baseline = 0;
    int n_test_damage = 0;
    std::uint64_t seed = 0;
};

// Seeded sampling without replacement; train is baseline-only and disjoint
// from the test baselines.
std::pair<Dataset, Dataset> split(const Dataset& dataset, const SplitSpec& spec);

// One signal per row of comma-separated floats; all rows equal length.
Dataset import_csv(const std::string& path, double sample_rate, Label label);

}  // namespace gwad::data

#endif  // GWAD_DATASET_HPP
