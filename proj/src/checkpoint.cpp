#include "gwad/checkpoint.hpp"

#include <fstream>

#include "gwad/binio.hpp"

namespace gwad::nn {

namespace {

void write_tensor_record(std::ostream& os, const std::string& name, const Tensor& t) {
    if (name.size() > 0xffff) throw std::invalid_argument("tensor name too long");
    binio::write_u16(os, static_cast<std::uint16_t>(name.size()));
    binio::put_bytes(os, name.data(), name.size());
    binio::write_u8(os, static_cast<std::uint8_t>(t.rank()));
    for (int d : t.shape) binio::write_u32(os, static_cast<std::uint32_t>(d));
    for (float v : t.values) binio::write_f32(os, v);
}

std::pair<std::string, Tensor> read_tensor_record(std::istream& is) {
    const std::uint16_t name_len = binio::read_u16(is);
    std::string name(name_len, '\0');
    binio::get_bytes(is, name.data(), name_len);
    const std::uint8_t rank = binio::read_u8(is);
    std::vector<int> shape(rank);
    for (auto& d : shape) {
        const std::uint32_t v = binio::read_u32(is);
        if (v == 0 || v > 0x7fffffffu) throw TruncatedFile("bad tensor dim in checkpoint");
        d = static_cast<int>(v);
    }
    Tensor t(shape);
    for (auto& v : t.values) v = binio::read_f32(is);
    return {std::move(name), std::move(t)};
}

}  // namespace

void save_tensors_vae1(const std::string& path,
                       const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    binio::write_magic(os, "VAE1");
    binio::write_u32(os, 1);
    binio::write_u32(os, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) write_tensor_record(os, name, *t);
    if (!os) throw std::runtime_error("failed writing " + path);
}

NamedTensors load_tensors_vae1(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    binio::expect_magic(is, "VAE1", path);
    const std::uint32_t version = binio::read_u32(is);
    if (version != 1)
        throw CheckpointMismatch("unsupported VAE1 version " + std::to_string(version) +
                                 " in " + path);
    const std::uint32_t count = binio::read_u32(is);
    NamedTensors out;
    out.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) out.push_back(read_tensor_record(is));
    return out;
}

void save_adam_opt1(const std::string& path, const AdamState& state,
                    const std::vector<std::pair<std::string, const Tensor*>>& params) {
    if (state.m.size() != params.size() || state.v.size() != params.size())
        throw ShapeMismatch("adam state does not match parameter list");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    binio::write_magic(os, "OPT1");
    binio::write_u32(os, 1);
    binio::write_u32(os, static_cast<std::uint32_t>(2 * params.size()));
    binio::write_u64(os, static_cast<std::uint64_t>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor m;
        m.shape = params[i].second->shape;
        m.values = state.m[i];
        write_tensor_record(os, params[i].first + ".m", m);
        Tensor v;
        v.shape = params[i].second->shape;
        v.values = state.v[i];
        write_tensor_record(os, params[i].first + ".v", v);
    }
    if (!os) throw std::runtime_error("failed writing " + path);
}

void load_adam_opt1(const std::string& path, AdamState& state,
                    const std::vector<std::pair<std::string, const Tensor*>>& params) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    binio::expect_magic(is, "OPT1", path);
    const std::uint32_t version = binio::read_u32(is);
    if (version != 1)
        throw CheckpointMismatch("unsupported OPT1 version " + std::to_string(version) +
                                 " in " + path);
    const std::uint32_t count = binio::read_u32(is);
    if (count != 2 * params.size())
        throw CheckpointMismatch("OPT1 tensor count does not match parameter list");
    state.step_count = static_cast<std::int64_t>(binio::read_u64(is));
    state.m.assign(params.size(), {});
    state.v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto [mname, m] = read_tensor_record(is);
        auto [vname, v] = read_tensor_record(is);
        if (mname != params[i].first + ".m" || vname != params[i].first + ".v")
            throw CheckpointMismatch("OPT1 tensor name mismatch at " + params[i].first);
        if (m.shape != params[i].second->shape || v.shape != params[i].second->shape)
            throw CheckpointMismatch("OPT1 tensor shape mismatch at " + params[i].first);
        state.m[i] = std::move(m.values);
        state.v[i] = std::move(v.values);
    }
}

}  // namespace gwad::nn

namespace gwad::vae {

void save_model(const std::string& path, VaeModel& model) {
    auto named = model.named_parameters();
    std::vector<std::pair<std::string, const nn::Tensor*>> tensors;
    tensors.reserve(named.size() + 1);
    nn::Tensor meta({2});
    meta.values[0] = static_cast<float>(model.latent_dim);
    meta.values[1] = static_cast<float>(model.image_size);
    tensors.emplace_back("__meta__", &meta);
    for (auto& [name, t] : named) tensors.emplace_back(name, t);
    nn::save_tensors_vae1(path, tensors);
}

void load_model(const std::string& path, VaeModel& model) {
    nn::NamedTensors loaded = nn::load_tensors_vae1(path);
    auto named = model.named_parameters();
    if (loaded.size() != named.size() + 1)
        throw nn::CheckpointMismatch("checkpoint tensor count does not match architecture");
    if (loaded[0].first != "__meta__" || loaded[0].second.numel() != 2)
        throw nn::CheckpointMismatch("checkpoint missing __meta__ record");
    const int latent = static_cast<int>(loaded[0].second.values[0]);
    const int size = static_cast<int>(loaded[0].second.values[1]);
    if (latent != model.latent_dim || size != model.image_size)
        throw nn::CheckpointMismatch(
            "checkpoint architecture (latent_dim=" + std::to_string(latent) + ", image_size=" +
            std::to_string(size) + ") does not match model (latent_dim=" +
            std::to_string(model.latent_dim) + ", image_size=" +
            std::to_string(model.image_size) + ")");
    for (std::size_t i = 0; i < named.size(); ++i) {
        auto& [want_name, target] = named[i];
        auto& [got_name, src] = loaded[i + 1];
        if (got_name != want_name)
            throw nn::CheckpointMismatch("checkpoint tensor " + got_name + " where " +
                                         want_name + " was expected");
        if (src.shape != target->shape)
            throw nn::CheckpointMismatch("checkpoint tensor " + got_name + " has shape " +
                                         nn::shape_str(src.shape) + ", model wants " +
                                         nn::shape_str(target->shape));
        target->values = std::move(src.values);
    }
}

}  // namespace gwad::vae
