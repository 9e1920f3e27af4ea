#include "gradkit/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

namespace gradkit {

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'G', 'K', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint32_t kMaxNameLen = 4096;
constexpr std::uint64_t kMaxElems = std::uint64_t{1} << 30;

template <typename T>
void write_raw(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const std::string& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw std::runtime_error(path + ": truncated checkpoint");
    }
    return v;
}

}  // namespace

void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, Tensor>>& entries) {
    std::set<std::string> seen;
    for (const auto& [name, tensor] : entries) {
        if (name.empty() || name.size() > kMaxNameLen) {
            throw std::invalid_argument("tensor name must be 1.." + std::to_string(kMaxNameLen) +
                                        " bytes");
        }
        if (!seen.insert(name).second) {
            throw std::invalid_argument("duplicate tensor name \"" + name + "\"");
        }
        (void)tensor;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_raw(out, static_cast<std::uint64_t>(entries.size()));
    for (const auto& [name, tensor] : entries) {
        write_raw(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_raw(out, static_cast<std::uint32_t>(tensor.shape.size()));
        for (std::size_t d : tensor.shape) {
            write_raw(out, static_cast<std::uint64_t>(d));
        }
        out.write(reinterpret_cast<const char*>(tensor.data.data()),
                  static_cast<std::streamsize>(tensor.data.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<std::pair<std::string, Tensor>> load_tensors(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error(path + ": not a checkpoint file");
    }
    const auto count = read_raw<std::uint64_t>(in, path);
    std::vector<std::pair<std::string, Tensor>> entries;
    std::set<std::string> seen;
    for (std::uint64_t e = 0; e < count; ++e) {
        const auto name_len = read_raw<std::uint32_t>(in, path);
        if (name_len == 0 || name_len > kMaxNameLen) {
            throw std::runtime_error(path + ": corrupt tensor name length");
        }
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw std::runtime_error(path + ": truncated checkpoint");
        if (!seen.insert(name).second) {
            throw std::runtime_error(path + ": duplicate tensor name \"" + name + "\"");
        }
        const auto rank = read_raw<std::uint32_t>(in, path);
        if (rank > 8) throw std::runtime_error(path + ": corrupt tensor rank");
        std::vector<std::size_t> shape(rank);
        std::uint64_t elems = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            const auto dim = read_raw<std::uint64_t>(in, path);
            if (dim == 0 || dim > kMaxElems || elems > kMaxElems / dim) {
                throw std::runtime_error(path + ": corrupt tensor shape");
            }
            shape[d] = static_cast<std::size_t>(dim);
            elems *= dim;
        }
        std::vector<double> data(elems);
        if (!in.read(reinterpret_cast<char*>(data.data()),
                     static_cast<std::streamsize>(elems * sizeof(double)))) {
            throw std::runtime_error(path + ": truncated checkpoint");
        }
        entries.emplace_back(std::move(name), Tensor(std::move(data), shape));
    }
    return entries;
}

void save_model(const std::string& path, const ModelSpec& spec, const ModelParams& params) {
    spec.validate();
    const std::size_t nl = spec.layer_sizes.size() - 1;
    if (params.tensors.size() != 2 * nl) {
        throw std::invalid_argument("model has " + std::to_string(params.tensors.size()) +
                                    " tensors, spec expects " + std::to_string(2 * nl));
    }
    std::vector<std::pair<std::string, Tensor>> entries;
    std::vector<double> sizes;
    for (std::size_t s : spec.layer_sizes) sizes.push_back(static_cast<double>(s));
    entries.emplace_back("layer_sizes", Tensor(std::move(sizes), {spec.layer_sizes.size()}));
    entries.emplace_back("activation",
                         Tensor({spec.activation == Activation::relu ? 0.0 : 1.0}, {}));
    for (std::size_t i = 0; i < nl; ++i) {
        entries.emplace_back("w" + std::to_string(i), params.tensors[2 * i]);
        entries.emplace_back("b" + std::to_string(i), params.tensors[2 * i + 1]);
    }
    save_tensors(path, entries);
}

std::pair<ModelSpec, ModelParams> load_model(const std::string& path) {
    const auto entries = load_tensors(path);
    const Tensor* sizes = nullptr;
    const Tensor* act = nullptr;
    for (const auto& [name, tensor] : entries) {
        if (name == "layer_sizes") sizes = &tensor;
        if (name == "activation") act = &tensor;
    }
    if (sizes == nullptr || act == nullptr) {
        throw std::runtime_error(path + ": missing layer_sizes or activation entry");
    }
    ModelSpec spec;
    spec.layer_sizes.clear();
    for (double v : sizes->data) {
        if (v < 1.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
            throw std::runtime_error(path + ": corrupt layer sizes");
        }
        spec.layer_sizes.push_back(static_cast<std::size_t>(v));
    }
    spec.activation = act->data.at(0) == 0.0 ? Activation::relu : Activation::tanh;
    spec.validate();

    ModelParams params;
    const std::size_t nl = spec.layer_sizes.size() - 1;
    for (std::size_t i = 0; i < nl; ++i) {
        for (const std::string& base : {"w" + std::to_string(i), "b" + std::to_string(i)}) {
            const Tensor* found = nullptr;
            for (const auto& [name, tensor] : entries) {
                if (name == base) found = &tensor;
            }
            if (found == nullptr) {
                throw std::runtime_error(path + ": missing tensor \"" + base + "\"");
            }
            params.tensors.push_back(*found);
        }
        const Tensor& w = params.tensors[2 * i];
        const Tensor& b = params.tensors[2 * i + 1];
        if (w.shape != std::vector<std::size_t>{spec.layer_sizes[i], spec.layer_sizes[i + 1]} ||
            b.shape != std::vector<std::size_t>{spec.layer_sizes[i + 1]}) {
            throw std::runtime_error(path + ": tensor shapes disagree with layer sizes");
        }
    }
    return {spec, params};
}

}  // namespace gradkit
