#include "gwad/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "gwad/binio.hpp"

namespace gwad::signal {

namespace {

constexpr double kPi = 3.141592653589793238462643383279;

// Gaussian envelope is below 2e-22 past |t| = 10; truncating the kernel
// there keeps the FFT route within double rounding of the full sum.
constexpr double kKernelCutoff = 10.0;

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

const char* label_name(Label label) {
    switch (label) {
        case Label::Baseline: return "baseline";
        case Label::Damage: return "damage";
        default: return "unknown";
    }
}

Label label_from_name(const std::string& name) {
    if (name == "baseline") return Label::Baseline;
    if (name == "damage") return Label::Damage;
    if (name == "unknown") return Label::Unknown;
    throw std::invalid_argument("unknown label name: " + name);
}

void Signal::validate() const {
    if (samples.empty()) throw std::invalid_argument("signal has no samples");
    if (!(sample_rate > 0.0)) throw std::invalid_argument("sample_rate must be > 0");
    for (double v : samples)
        if (!std::isfinite(v)) throw std::invalid_argument("signal contains non-finite sample");
}

void WaveletBasis::validate() const {
    if (kind != Kind::Morlet) throw std::invalid_argument("unsupported wavelet kind");
    if (!(center_param >= 5.0))
        throw std::invalid_argument("Morlet center_param must be >= 5");
}

ScaleGrid ScaleGrid::log_spaced(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2)
        throw std::invalid_argument("log_spaced requires 0 < lo < hi and count >= 2");
    ScaleGrid g;
    g.scales.resize(static_cast<std::size_t>(count));
    const double step = (std::log(hi) - std::log(lo)) / (count - 1);
    for (int i = 0; i < count; ++i)
        g.scales[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    g.scales.front() = lo;
    g.scales.back() = hi;
    return g;
}

void ScaleGrid::validate() const {
    if (scales.empty()) throw std::invalid_argument("scale grid is empty");
    double prev = 0.0;
    for (double a : scales) {
        if (!(a > prev)) throw std::invalid_argument("scales must be positive and strictly increasing");
        prev = a;
    }
}

std::complex<double> morlet_eval(double t, double center_param) {
    const double norm = std::pow(kPi, -0.25);
    const double envelope = std::exp(-0.5 * t * t);
    return std::polar(norm * envelope, center_param * t);
}

CwtPlan::CwtPlan(int n_samples, const WaveletBasis& basis, const ScaleGrid& grid)
    : n_(n_samples), grid_(grid) {
    basis.validate();
    grid_.validate();
    if (n_ < 1) throw std::invalid_argument("n_samples must be >= 1");
    for (double a : grid_.scales)
        if (a < 1.0) throw InvalidScale("scale below one sample cannot be resolved");

    const double a_max = grid_.scales.back();
    const std::size_t half = static_cast<std::size_t>(std::ceil(kKernelCutoff * a_max));
    fft_size_ = next_pow2(static_cast<std::size_t>(n_) + 2 * half + 1);

    // Twiddle table and bit-reversal permutation for the fixed FFT size.
    twiddle_.resize(fft_size_ / 2);
    for (std::size_t k = 0; k < fft_size_ / 2; ++k)
        twiddle_[k] = std::polar(1.0, -2.0 * kPi * static_cast<double>(k) /
                                          static_cast<double>(fft_size_));
    bitrev_.resize(fft_size_);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < fft_size_) ++log2n;
    for (std::size_t i = 0; i < fft_size_; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < log2n; ++b)
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
        bitrev_[i] = static_cast<std::uint32_t>(r);
    }

    // Per scale: H[m] = k(-m) with wraparound, where
    // k(s) = conj(Phi(s/a)) / sqrt(a). Row = IFFT(FFT(x) * FFT(H)).
    kernel_fft_.resize(grid_.scales.size());
    for (std::size_t si = 0; si < grid_.scales.size(); ++si) {
        const double a = grid_.scales[si];
        const long support = static_cast<long>(std::ceil(kKernelCutoff * a));
        std::vector<std::complex<double>> h(fft_size_, {0.0, 0.0});
        const double inv_sqrt_a = 1.0 / std::sqrt(a);
        for (long s = -support; s <= support; ++s) {
            const std::complex<double> k =
                std::conj(morlet_eval(static_cast<double>(s) / a, basis.center_param)) * inv_sqrt_a;
            const std::size_t idx =
                static_cast<std::size_t>(((-s) % static_cast<long>(fft_size_) +
                                          static_cast<long>(fft_size_)) %
                                         static_cast<long>(fft_size_));
            h[idx] += k;
        }
        fft(h, false);
        kernel_fft_[si] = std::move(h);
    }
}

void CwtPlan::fft(std::vector<std::complex<double>>& buf, bool inverse) const {
    const std::size_t n = fft_size_;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = bitrev_[i];
        if (i < j) std::swap(buf[i], buf[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t base = 0; base < n; base += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> w = twiddle_[k * stride];
                if (inverse) w = std::conj(w);
                const std::complex<double> u = buf[base + k];
                const std::complex<double> t = buf[base + k + len / 2] * w;
                buf[base + k] = u + t;
                buf[base + k + len / 2] = u - t;
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : buf) v *= scale;
    }
}

void CwtPlan::apply_complex(const std::vector<double>& samples,
                            std::vector<std::complex<double>>& out) const {
    if (static_cast<int>(samples.size()) != n_)
        throw std::invalid_argument("sample count does not match plan");
    const std::size_t n_scales = grid_.scales.size();
    out.assign(n_scales * static_cast<std::size_t>(n_), {0.0, 0.0});

    std::vector<std::complex<double>> sig_fft(fft_size_, {0.0, 0.0});
    for (int t = 0; t < n_; ++t) sig_fft[static_cast<std::size_t>(t)] = samples[static_cast<std::size_t>(t)];
    fft(sig_fft, false);

    std::vector<std::complex<double>> work(fft_size_);
    for (std::size_t si = 0; si < n_scales; ++si) {
        const auto& hk = kernel_fft_[si];
        for (std::size_t m = 0; m < fft_size_; ++m) work[m] = sig_fft[m] * hk[m];
        fft(work, true);
        std::complex<double>* row = out.data() + si * static_cast<std::size_t>(n_);
        for (int b = 0; b < n_; ++b) row[b] = work[static_cast<std::size_t>(b)];
    }
}

Scalogram CwtPlan::apply(const Signal& sig) const {
    sig.validate();
    std::vector<std::complex<double>> coeffs;
    apply_complex(sig.samples, coeffs);

    Scalogram map;
    map.n_scales = static_cast<int>(grid_.scales.size());
    map.n_times = n_;
    map.scale_axis = grid_.scales;
    map.time_axis.resize(static_cast<std::size_t>(n_));
    for (int t = 0; t < n_; ++t) map.time_axis[static_cast<std::size_t>(t)] = t;
    map.values.resize(coeffs.size());
    for (std::size_t i = 0; i < coeffs.size(); ++i) map.values[i] = std::abs(coeffs[i]);
    return map;
}

Scalogram cwt(const Signal& sig, const WaveletBasis& basis, const ScaleGrid& grid) {
    sig.validate();
    CwtPlan plan(static_cast<int>(sig.samples.size()), basis, grid);
    return plan.apply(sig);
}

std::vector<std::complex<double>> cwt_complex(const Signal& sig, const WaveletBasis& basis,
                                              const ScaleGrid& grid) {
    sig.validate();
    CwtPlan plan(static_cast<int>(sig.samples.size()), basis, grid);
    std::vector<std::complex<double>> out;
    plan.apply_complex(sig.samples, out);
    return out;
}

namespace {

// Corner-aligned source coordinate for output index i of out_n points.
double src_coord(int i, int in_n, int out_n) {
    if (out_n <= 1 || in_n <= 1) return 0.0;
    return static_cast<double>(i) * static_cast<double>(in_n - 1) /
           static_cast<double>(out_n - 1);
}

std::vector<double> resample_axis(const std::vector<double>& axis, int out_n) {
    std::vector<double> out(static_cast<std::size_t>(out_n));
    const int in_n = static_cast<int>(axis.size());
    for (int i = 0; i < out_n; ++i) {
        const double x = src_coord(i, in_n, out_n);
        const int lo = static_cast<int>(x);
        const int hi = std::min(lo + 1, in_n - 1);
        const double f = x - lo;
        out[static_cast<std::size_t>(i)] =
            axis[static_cast<std::size_t>(lo)] * (1.0 - f) + axis[static_cast<std::size_t>(hi)] * f;
    }
    return out;
}

}  // namespace

Scalogram resize_bilinear(const Scalogram& map, int out_h, int out_w) {
    if (map.n_scales < 1 || map.n_times < 1)
        throw std::invalid_argument("resize_bilinear: empty scalogram");
    if (out_h < 1 || out_w < 1)
        throw std::invalid_argument("resize_bilinear: target size must be >= 1");

    Scalogram out;
    out.n_scales = out_h;
    out.n_times = out_w;
    out.values.resize(static_cast<std::size_t>(out_h) * static_cast<std::size_t>(out_w));
    out.scale_axis = resample_axis(map.scale_axis, out_h);
    out.time_axis = resample_axis(map.time_axis, out_w);

    for (int i = 0; i < out_h; ++i) {
        const double y = src_coord(i, map.n_scales, out_h);
        const int y0 = static_cast<int>(y);
        const int y1 = std::min(y0 + 1, map.n_scales - 1);
        const double fy = y - y0;
        for (int j = 0; j < out_w; ++j) {
            const double x = src_coord(j, map.n_times, out_w);
            const int x0 = static_cast<int>(x);
            const int x1 = std::min(x0 + 1, map.n_times - 1);
            const double fx = x - x0;
            const double v = map.at(y0, x0) * (1.0 - fy) * (1.0 - fx) +
                             map.at(y0, x1) * (1.0 - fy) * fx +
                             map.at(y1, x0) * fy * (1.0 - fx) +
                             map.at(y1, x1) * fy * fx;
            out.at(i, j) = v;
        }
    }
    return out;
}

Scalogram normalize_minmax(const Scalogram& map) {
    if (map.values.empty()) throw std::invalid_argument("normalize_minmax: empty scalogram");
    const auto [mn_it, mx_it] = std::minmax_element(map.values.begin(), map.values.end());
    const double mn = *mn_it;
    const double mx = *mx_it;

    Scalogram out = map;
    if (mx == mn) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        return out;
    }
    const double inv = 1.0 / (mx - mn);
    for (auto& v : out.values) v = (v - mn) * inv;
    return out;
}

void write_pgm(const Scalogram& map, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << "P5\n" << map.n_times << " " << map.n_scales << "\n255\n";
    // Largest scale (last row in memory) goes to the top of the image.
    for (int i = map.n_scales - 1; i >= 0; --i) {
        for (int j = 0; j < map.n_times; ++j) {
            const double v = std::clamp(map.at(i, j), 0.0, 1.0);
            const auto byte = static_cast<unsigned char>(std::lround(255.0 * v));
            os.put(static_cast<char>(byte));
        }
    }
    if (!os) throw std::runtime_error("failed writing " + path);
}

void write_scg1(const Scalogram& map, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    binio::write_magic(os, "SCG1");
    binio::write_u32(os, 1);
    binio::write_u32(os, static_cast<std::uint32_t>(map.n_scales));
    binio::write_u32(os, static_cast<std::uint32_t>(map.n_times));
    for (double v : map.values) binio::write_f32(os, static_cast<float>(v));
    if (!os) throw std::runtime_error("failed writing " + path);
}

Scalogram read_scg1(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    binio::expect_magic(is, "SCG1", path);
    const std::uint32_t version = binio::read_u32(is);
    if (version != 1) throw BadMagic("unsupported SCG1 version in " + path);
    const std::uint32_t n_scales = binio::read_u32(is);
    const std::uint32_t n_times = binio::read_u32(is);
    if (n_scales == 0 || n_times == 0) throw BadMagic("degenerate SCG1 dimensions in " + path);

    Scalogram map;
    map.n_scales = static_cast<int>(n_scales);
    map.n_times = static_cast<int>(n_times);
    map.values.resize(static_cast<std::size_t>(n_scales) * n_times);
    for (auto& v : map.values) v = binio::read_f32(is);
    map.scale_axis.resize(n_scales);
    for (std::uint32_t i = 0; i < n_scales; ++i) map.scale_axis[i] = i + 1.0;
    map.time_axis.resize(n_times);
    for (std::uint32_t j = 0; j < n_times; ++j) map.time_axis[j] = j;
    return map;
}

}  // namespace gwad::signal
