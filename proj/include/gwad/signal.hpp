#ifndef GWAD_SIGNAL_HPP
#define GWAD_SIGNAL_HPP

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gwad::signal {

enum class Label : std::uint8_t { Baseline = 0, Damage = 1, Unknown = 2 };

const char* label_name(Label label);
Label label_from_name(const std::string& name);

struct InvalidScale : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A sampled 1-d waveform. Samples are dimensionless amplitudes.
struct Signal {
    std::vector<double> samples;
    double sample_rate = 0.0;  // Hz
    Label label = Label::Unknown;
    std::string id;

    void validate() const;
};

struct WaveletBasis {
    enum class Kind { Morlet };
    Kind kind = Kind::Morlet;
    double center_param = 6.0;  // Morlet omega0; >= 5 keeps the basis admissible

    void validate() const;
};

// Analysis scales in units of samples, strictly increasing.
struct ScaleGrid {
    std::vector<double> scales;

    static ScaleGrid log_spaced(double lo, double hi, int count);
    void validate() const;
};

// Magnitude map over [n_scales x n_times], row-major, row i = scales[i].
struct Scalogram {
    int n_scales = 0;
    int n_times = 0;
    std::vector<double> values;
    std::vector<double> scale_axis;
    std::vector<double> time_axis;

    double at(int i, int j) const {
        return values[static_cast<std::size_t>(i) * n_times + j];
    }
    double& at(int i, int j) {
        return values[static_cast<std::size_t>(i) * n_times + j];
    }
};

// Complex Morlet mother wavelet: pi^(-1/4) * exp(i*w0*t) * exp(-t^2/2).
std::complex<double> morlet_eval(double t, double center_param);

// Reusable transform state for one (signal length, basis, grid) combination:
// the per-scale wavelet kernels are built and Fourier-transformed once.
// apply() is const and safe to call from many threads.
class CwtPlan {
public:
    CwtPlan(int n_samples, const WaveletBasis& basis, const ScaleGrid& grid);

    // Complex coefficients, row-major [n_scales x n_samples].
    void apply_complex(const std::vector<double>& samples,
                       std::vector<std::complex<double>>& out) const;

    Scalogram apply(const Signal& sig) const;

    int n_samples() const { return n_; }
    const ScaleGrid& grid() const { return grid_; }

private:
    int n_ = 0;
    std::size_t fft_size_ = 0;
    ScaleGrid grid_;
    std::vector<std::vector<std::complex<double>>> kernel_fft_;  // per scale
    std::vector<std::complex<double>> twiddle_;
    std::vector<std::uint32_t> bitrev_;

    void fft(std::vector<std::complex<double>>& buf, bool inverse) const;
};

// One-shot transforms (build a plan internally).
Scalogram cwt(const Signal& sig, const WaveletBasis& basis, const ScaleGrid& grid);
std::vector<std::complex<double>> cwt_complex(const Signal& sig, const WaveletBasis& basis,
                                              const ScaleGrid& grid);

// Corner-aligned bilinear interpolation onto an out_h x out_w grid.
Scalogram resize_bilinear(const Scalogram& map, int out_h, int out_w);

// (v - min) / (max - min); a constant map collapses to all zeros.
Scalogram normalize_minmax(const Scalogram& map);

// 8-bit binary PGM, largest scale in the top row. Expects values in [0, 1].
void write_pgm(const Scalogram& map, const std::string& path);

// Raw float32 dump: magic "SCG1", u32 version, u32 n_scales, u32 n_times,
// then row-major little-endian values.
void write_scg1(const Scalogram& map, const std::string& path);
Scalogram read_scg1(const std::string& path);

}  // namespace gwad::signal

#endif  // GWAD_SIGNAL_HPP
