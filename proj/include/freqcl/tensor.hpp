#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "freqcl/errors.hpp"

namespace freqcl {

template <typename S>
struct Tensor {
    std::vector<int> shape;
    std::vector<S> data;  // row-major

    Tensor() = default;
    explicit Tensor(std::vector<int> dims) : shape(std::move(dims)) {
        data.assign(element_count(shape), S{0});
    }

    static std::size_t element_count(const std::vector<int>& dims) {
        std::size_t n = 1;
        for (int d : dims) n *= static_cast<std::size_t>(d);
        return n;
    }

    std::size_t size() const { return data.size(); }
    bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

template <typename S>
struct NamedTensor {
    std::string name;
    Tensor<S> tensor;
};

// Ordered, uniquely-named tensor set. Equal configurations produce equal
// layouts, which makes parameter sets elementwise combinable.
template <typename S>
struct Params {
    std::vector<NamedTensor<S>> items;

    Tensor<S>& find(std::string_view name) {
        for (auto& it : items)
            if (it.name == name) return it.tensor;
        throw DataError("no tensor named " + std::string(name));
    }
    const Tensor<S>& find(std::string_view name) const {
        for (const auto& it : items)
            if (it.name == name) return it.tensor;
        throw DataError("no tensor named " + std::string(name));
    }

    void add(std::string name, Tensor<S> tensor) {
        for (const auto& it : items)
            if (it.name == name) throw DataError("duplicate tensor name " + name);
        items.push_back({std::move(name), std::move(tensor)});
    }

    std::size_t total_size() const {
        std::size_t n = 0;
        for (const auto& it : items) n += it.tensor.size();
        return n;
    }

    bool same_layout(const Params& other) const {
        if (items.size() != other.items.size()) return false;
        for (std::size_t i = 0; i < items.size(); ++i)
            if (items[i].name != other.items[i].name ||
                items[i].tensor.shape != other.items[i].tensor.shape)
                return false;
        return true;
    }

    static Params zeros_like(const Params& ref) {
        Params out;
        out.items.reserve(ref.items.size());
        for (const auto& it : ref.items) out.items.push_back({it.name, Tensor<S>(it.tensor.shape)});
        return out;
    }

    template <typename T>
    Params<T> cast() const {
        Params<T> out;
        out.items.reserve(items.size());
        for (const auto& it : items) {
            Tensor<T> t(it.tensor.shape);
            for (std::size_t i = 0; i < t.data.size(); ++i)
                t.data[i] = static_cast<T>(it.tensor.data[i]);
            out.items.push_back({it.name, std::move(t)});
        }
        return out;
    }
};

// out += scale * grads, tensor by tensor. Layouts must match.
template <typename S>
void accumulate(Params<S>& out, const Params<S>& grads, S scale = S{1}) {
    if (!out.same_layout(grads)) throw DataError("accumulate: parameter layout mismatch");
    for (std::size_t i = 0; i < out.items.size(); ++i) {
        auto& dst = out.items[i].tensor.data;
        const auto& src = grads.items[i].tensor.data;
        for (std::size_t e = 0; e < dst.size(); ++e) dst[e] += scale * src[e];
    }
}

}  // namespace freqcl
