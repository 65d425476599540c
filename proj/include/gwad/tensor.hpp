#ifndef GWAD_TENSOR_HPP
#define GWAD_TENSOR_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace gwad::nn {

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingCache : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dense n-d array with an optional same-shape gradient slot. Training uses
// float; the double instantiation exists for finite-difference checks.
template <typename T>
struct TensorT {
    std::vector<int> shape;
    std::vector<T> values;
    std::vector<T> grad;  // empty until ensure_grad()

    TensorT() = default;
    explicit TensorT(std::vector<int> s)
        : shape(std::move(s)), values(static_cast<std::size_t>(numel_of(shape)), T(0)) {}

    static std::int64_t numel_of(const std::vector<int>& s) {
        std::int64_t n = 1;
        for (int d : s) {
            if (d <= 0) throw ShapeMismatch("tensor dims must be positive");
            n *= d;
        }
        return n;
    }

    std::int64_t numel() const { return static_cast<std::int64_t>(values.size()); }

    int dim(int i) const { return shape.at(static_cast<std::size_t>(i)); }
    int rank() const { return static_cast<int>(shape.size()); }

    T* data() { return values.data(); }
    const T* data() const { return values.data(); }

    void ensure_grad() {
        if (grad.size() != values.size()) grad.assign(values.size(), T(0));
    }

    void zero_grad() {
        if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
    }

    void fill(T v) { std::fill(values.begin(), values.end(), v); }

    bool same_shape(const TensorT& other) const { return shape == other.shape; }

    template <typename U>
    TensorT<U> cast() const {
        TensorT<U> out;
        out.shape = shape;
        out.values.resize(values.size());
        std::transform(values.begin(), values.end(), out.values.begin(),
                       [](T v) { return static_cast<U>(v); });
        return out;
    }
};

using Tensor = TensorT<float>;

inline std::string shape_str(const std::vector<int>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

template <typename T>
void require_shape(const TensorT<T>& t, const std::vector<int>& want, const char* what) {
    if (t.shape != want)
        throw ShapeMismatch(std::string(what) + ": expected " + shape_str(want) +
                            ", got " + shape_str(t.shape));
}

}  // namespace gwad::nn

#endif  // GWAD_TENSOR_HPP
