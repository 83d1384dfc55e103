#include "editseq/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace editseq {

namespace {

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_i64(std::string& out, int64_t v) {
    uint64_t u = static_cast<uint64_t>(v);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

void put_string(std::string& out, const std::string& s) {
    put_u32(out, static_cast<uint32_t>(s.size()));
    out += s;
}

struct Reader {
    const std::string& data;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > data.size()) throw std::runtime_error("checkpoint: truncated file");
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
        return v;
    }
    int64_t i64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
        return static_cast<int64_t>(v);
    }
    double f64() {
        need(8);
        uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(static_cast<unsigned char>(data[pos++])) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        uint32_t n = u32();
        need(n);
        std::string s = data.substr(pos, n);
        pos += n;
        return s;
    }
    std::vector<double> f64_array() {
        uint32_t n = u32();
        std::vector<double> v(n);
        for (uint32_t i = 0; i < n; ++i) v[i] = f64();
        return v;
    }
};

void put_f64_array(std::string& out, std::span<const double> values) {
    put_u32(out, static_cast<uint32_t>(values.size()));
    for (double v : values) put_f64(out, v);
}

}  // namespace

const Checkpoint::Entry* Checkpoint::find(const std::string& name) const {
    for (const Entry& e : tensors) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

void save_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
    std::string out;
    out.append(Checkpoint::kMagic, 8);
    put_u32(out, Checkpoint::kVersion);

    const ModelConfig& cfg = checkpoint.config;
    put_i64(out, cfg.vocab_size);
    put_i64(out, cfg.embed_dim);
    put_i64(out, cfg.hidden_dim);
    put_i64(out, cfg.attn_dim);
    put_i64(out, cfg.k);
    put_i64(out, cfg.d_v);
    out.push_back(cfg.use_visual ? 1 : 0);
    out.push_back(cfg.use_context_gate ? 1 : 0);
    out.push_back(cfg.hard_scma ? 1 : 0);
    out.push_back(cfg.fuse_dcnet ? 1 : 0);
    put_i64(out, checkpoint.epoch);

    put_u32(out, static_cast<uint32_t>(checkpoint.tensors.size()));
    for (const auto& entry : checkpoint.tensors) {
        put_string(out, entry.name);
        put_u32(out, static_cast<uint32_t>(entry.shape.size()));
        for (int64_t d : entry.shape) put_i64(out, d);
        put_f64_array(out, entry.values);
    }

    put_u32(out, static_cast<uint32_t>(checkpoint.optimizers.size()));
    for (const auto& opt : checkpoint.optimizers) {
        put_string(out, opt.name);
        put_i64(out, opt.step_count);
        put_u32(out, static_cast<uint32_t>(opt.slots.size()));
        for (size_t i = 0; i < opt.slots.size(); ++i) {
            put_string(out, opt.slot_names[i]);
            put_f64_array(out, opt.slots[i].m);
            put_f64_array(out, opt.slots[i].v);
        }
    }

    std::ofstream file(path, std::ios::binary);
    if (!file.good()) throw std::runtime_error("save_checkpoint: cannot open " + path);
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file.good()) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file.good()) throw std::runtime_error("load_checkpoint: cannot open " + path);
    std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
    Reader in{data};

    in.need(8);
    if (std::memcmp(data.data(), Checkpoint::kMagic, 8) != 0) {
        throw std::runtime_error("load_checkpoint: bad magic in " + path);
    }
    in.pos = 8;
    uint32_t version = in.u32();
    if (version != Checkpoint::kVersion) {
        throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version));
    }

    Checkpoint checkpoint;
    ModelConfig& cfg = checkpoint.config;
    cfg.vocab_size = in.i64();
    cfg.embed_dim = in.i64();
    cfg.hidden_dim = in.i64();
    cfg.attn_dim = in.i64();
    cfg.k = in.i64();
    cfg.d_v = in.i64();
    in.need(4);
    cfg.use_visual = data[in.pos++] != 0;
    cfg.use_context_gate = data[in.pos++] != 0;
    cfg.hard_scma = data[in.pos++] != 0;
    cfg.fuse_dcnet = data[in.pos++] != 0;
    checkpoint.epoch = in.i64();

    uint32_t n_tensors = in.u32();
    checkpoint.tensors.reserve(n_tensors);
    for (uint32_t i = 0; i < n_tensors; ++i) {
        Checkpoint::Entry entry;
        entry.name = in.str();
        uint32_t ndims = in.u32();
        for (uint32_t d = 0; d < ndims; ++d) entry.shape.push_back(in.i64());
        entry.values = in.f64_array();
        if (shape_numel(entry.shape) != static_cast<int64_t>(entry.values.size())) {
            throw std::runtime_error("load_checkpoint: size mismatch for tensor " + entry.name);
        }
        checkpoint.tensors.push_back(std::move(entry));
    }

    uint32_t n_optimizers = in.u32();
    for (uint32_t i = 0; i < n_optimizers; ++i) {
        Checkpoint::OptimizerState opt;
        opt.name = in.str();
        opt.step_count = in.i64();
        uint32_t n_slots = in.u32();
        for (uint32_t s = 0; s < n_slots; ++s) {
            opt.slot_names.push_back(in.str());
            Adam::Slot slot;
            slot.m = in.f64_array();
            slot.v = in.f64_array();
            opt.slots.push_back(std::move(slot));
        }
        checkpoint.optimizers.push_back(std::move(opt));
    }
    if (in.pos != data.size()) throw std::runtime_error("load_checkpoint: trailing bytes in " + path);
    return checkpoint;
}

void checkpoint_add_tensors(Checkpoint& checkpoint, const std::vector<NamedTensor>& params) {
    for (const NamedTensor& p : params) {
        Checkpoint::Entry entry;
        entry.name = p.name;
        entry.shape = p.tensor.shape();
        entry.values.assign(p.tensor.values().begin(), p.tensor.values().end());
        checkpoint.tensors.push_back(std::move(entry));
    }
}

void checkpoint_restore_tensors(const Checkpoint& checkpoint,
                                const std::vector<NamedTensor>& params) {
    for (const NamedTensor& p : params) {
        const Checkpoint::Entry* entry = checkpoint.find(p.name);
        if (!entry) throw std::runtime_error("checkpoint: missing tensor " + p.name);
        if (entry->shape != p.tensor.shape()) {
            throw std::runtime_error("checkpoint: shape mismatch for " + p.name + ", stored " +
                                     shape_str(entry->shape) + " vs model " +
                                     shape_str(p.tensor.shape()));
        }
        Tensor tensor = p.tensor;
        auto dst = tensor.mutable_values();
        std::copy(entry->values.begin(), entry->values.end(), dst.begin());
    }
}

void checkpoint_add_optimizer(Checkpoint& checkpoint, const std::string& name, const Adam& adam) {
    Checkpoint::OptimizerState opt;
    opt.name = name;
    opt.step_count = adam.step_count();
    for (size_t i = 0; i < adam.params().size(); ++i) {
        opt.slot_names.push_back(adam.params()[i].name);
        opt.slots.push_back(adam.slots()[i]);
    }
    checkpoint.optimizers.push_back(std::move(opt));
}

bool checkpoint_restore_optimizer(const Checkpoint& checkpoint, const std::string& name,
                                  Adam& adam) {
    for (const auto& opt : checkpoint.optimizers) {
        if (opt.name != name) continue;
        if (opt.slots.size() != adam.params().size()) {
            throw std::runtime_error("checkpoint: optimizer " + name + " has " +
                                     std::to_string(opt.slots.size()) + " slots, model needs " +
                                     std::to_string(adam.params().size()));
        }
        for (size_t i = 0; i < opt.slots.size(); ++i) {
            if (opt.slot_names[i] != adam.params()[i].name) {
                throw std::runtime_error("checkpoint: optimizer slot order mismatch at " +
                                         opt.slot_names[i]);
            }
        }
        adam.restore(opt.slots, opt.step_count);
        return true;
    }
    return false;
}

}  // namespace editseq
