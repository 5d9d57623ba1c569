#include "freqcl/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "freqcl/errors.hpp"

namespace freqcl {

namespace {

constexpr char kMagic[4] = {'F', 'Q', 'C', 'L'};
constexpr std::uint32_t kVersion = 1;

void put_bytes(std::string& out, const void* p, std::size_t n) {
    out.append(static_cast<const char*>(p), n);
}

void put_u16(std::string& out, std::uint16_t v) { put_bytes(out, &v, 2); }
void put_u32(std::string& out, std::uint32_t v) { put_bytes(out, &v, 4); }

struct Reader {
    const char* p;
    std::size_t n;
    std::size_t pos = 0;
    const std::string& path;

    void need(std::size_t k, const char* what) {
        if (pos + k > n)
            throw FormatError(std::string("truncated checkpoint (") + what + "): " + path);
    }
    std::uint16_t u16(const char* what) {
        need(2, what);
        std::uint16_t v;
        std::memcpy(&v, p + pos, 2);
        pos += 2;
        return v;
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v;
        std::memcpy(&v, p + pos, 4);
        pos += 4;
        return v;
    }
    std::uint8_t u8(const char* what) {
        need(1, what);
        return static_cast<std::uint8_t>(p[pos++]);
    }
};

std::string shape_string(const std::vector<int>& dims) {
    std::string s = "[";
    for (std::size_t i = 0; i < dims.size(); ++i)
        s += (i ? "," : "") + std::to_string(dims[i]);
    return s + "]";
}

}  // namespace

void write_tensor_file(const std::string& path, const std::vector<NamedTensor<float>>& tensors) {
    std::string out;
    put_bytes(out, kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& nt : tensors) {
        if (nt.name.size() > 0xffff) throw DataError("tensor name too long: " + nt.name);
        put_u16(out, static_cast<std::uint16_t>(nt.name.size()));
        out.append(nt.name);
        out.push_back(static_cast<char>(nt.tensor.shape.size()));
        for (int d : nt.tensor.shape) put_u32(out, static_cast<std::uint32_t>(d));
        put_bytes(out, nt.tensor.data.data(), nt.tensor.data.size() * 4);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failed: " + path);
}

std::vector<NamedTensor<float>> read_tensor_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    Reader r{bytes.data(), bytes.size(), 0, path};
    r.need(4, "magic");
    if (std::memcmp(r.p, kMagic, 4) != 0) throw FormatError("bad checkpoint magic: " + path);
    r.pos = 4;
    const std::uint32_t version = r.u32("version");
    if (version != kVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + ": " +
                          path);
    const std::uint32_t count = r.u32("tensor count");

    std::vector<NamedTensor<float>> tensors;
    tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint16_t name_len = r.u16("name length");
        r.need(name_len, "name");
        std::string name(r.p + r.pos, name_len);
        r.pos += name_len;
        const std::uint8_t rank = r.u8("rank");
        std::vector<int> dims(rank);
        for (auto& d : dims) d = static_cast<int>(r.u32("dims"));
        Tensor<float> t(dims);
        r.need(t.size() * 4, "payload");
        std::memcpy(t.data.data(), r.p + r.pos, t.size() * 4);
        r.pos += t.size() * 4;
        tensors.push_back({std::move(name), std::move(t)});
    }
    if (r.pos != r.n)
        throw FormatError("trailing bytes after tensor payloads: " + path);
    return tensors;
}

void save_checkpoint(const Params<float>& params, const std::string& path) {
    write_tensor_file(path, params.items);
}

Params<float> load_checkpoint(const std::string& path) {
    Params<float> params;
    for (auto& nt : read_tensor_file(path)) params.add(std::move(nt.name), std::move(nt.tensor));
    return params;
}

void validate_checkpoint_shapes(const Params<float>& params, const EncoderConfig& cfg) {
    const Params<float> expected = init_params<float>(cfg, 0);
    for (const auto& want : expected.items) {
        const NamedTensor<float>* got = nullptr;
        for (const auto& it : params.items)
            if (it.name == want.name) {
                got = &it;
                break;
            }
        if (!got) throw FormatError("checkpoint is missing tensor " + want.name);
        if (got->tensor.shape != want.tensor.shape)
            throw FormatError("checkpoint tensor " + want.name + " has shape " +
                              shape_string(got->tensor.shape) + ", expected " +
                              shape_string(want.tensor.shape));
    }
    for (const auto& it : params.items) {
        bool known = false;
        for (const auto& want : expected.items)
            if (want.name == it.name) {
                known = true;
                break;
            }
        if (!known) throw FormatError("checkpoint has unexpected tensor " + it.name);
    }
}

}  // namespace freqcl
