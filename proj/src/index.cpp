#include "fp8ann/index.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fp8ann {

static_assert(std::endian::native == std::endian::little, "index I/O assumes a little-endian host");

namespace {

constexpr std::string_view kMagic = "IVFPQ001";

class Writer {
public:
    template <typename T>
    void put(T value) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
        bytes_.insert(bytes_.end(), p, p + sizeof(T));
    }
    template <typename T>
    void put_array(std::span<const T> values) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
        bytes_.insert(bytes_.end(), p, p + values.size_bytes());
    }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        T value;
        std::memcpy(&value, take(sizeof(T)), sizeof(T));
        return value;
    }
    template <typename T>
    void get_array(std::span<T> out) {
        std::memcpy(out.data(), take(out.size_bytes()), out.size_bytes());
    }
    std::size_t remaining() const { return bytes_.size() - offset_; }

private:
    const std::uint8_t* take(std::size_t n) {
        if (remaining() < n) {
            throw std::runtime_error("truncated index file");
        }
        const auto* p = bytes_.data() + offset_;
        offset_ += n;
        return p;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t offset_ = 0;
};

std::uint32_t narrow_u32(std::size_t v, const char* what) {
    if (v > 0xFFFFFFFFu) {
        throw std::invalid_argument(std::string(what) + " does not fit in u32");
    }
    return static_cast<std::uint32_t>(v);
}

}  // namespace

IvfPqIndex build_index(const VectorSet& data, std::size_t nlist, std::size_t s, std::size_t p, std::uint64_t seed) {
    if (s == 0 || data.d % s != 0) {
        throw std::invalid_argument("d not divisible by s (d=" + std::to_string(data.d) + ", s=" + std::to_string(s) +
                                    ")");
    }
    if (p < 1 || p > 8) {
        throw std::invalid_argument("PQ bits must be in [1, 8]");
    }
    if (nlist < 1 || data.n < nlist || data.n < (std::size_t{1} << p)) {
        throw std::invalid_argument("build_index: need at least max(nlist, 2^p) vectors, got " +
                                    std::to_string(data.n));
    }

    IvfPqIndex idx;
    idx.d = data.d;
    idx.nlist = nlist;
    idx.ntotal = data.n;
    idx.coarse = train_coarse(data, nlist, seed);

    std::vector<std::uint32_t> assignments(data.n);
    for (std::size_t i = 0; i < data.n; ++i) {
        assignments[i] = nearest_centroid(data.row(i), idx.coarse);
    }
    const auto residuals = compute_residuals(data, idx.coarse, assignments);
    idx.cb = train_pq(residuals, s, p, subspace_seed(seed, s + 1));

    idx.lists.resize(nlist);
    std::vector<std::uint8_t> code(s);
    for (std::size_t i = 0; i < data.n; ++i) {
        pq_encode(residuals.row(i), idx.cb, code);
        auto& list = idx.lists[assignments[i]];
        list.ids.push_back(i);
        list.codes.insert(list.codes.end(), code.begin(), code.end());
    }
    return idx;
}

void validate(const IvfPqIndex& idx) {
    const auto& cb = idx.cb;
    if (idx.d == 0 || idx.nlist == 0) {
        throw std::invalid_argument("index: d and nlist must be positive");
    }
    if (cb.p < 1 || cb.p > 8 || cb.s == 0 || cb.s * cb.sub_d != idx.d) {
        throw std::invalid_argument("index: codebook shape inconsistent with d");
    }
    if (cb.centers.size() != cb.s * cb.ksub() * cb.sub_d) {
        throw std::invalid_argument("index: codebook size mismatch");
    }
    if (idx.coarse.d != idx.d || idx.coarse.n != idx.nlist || idx.coarse.data.size() != idx.nlist * idx.d) {
        throw std::invalid_argument("index: coarse centroids shape mismatch");
    }
    for (const float v : idx.coarse.data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("index: non-finite coarse centroid");
        }
    }
    for (const float v : cb.centers) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("index: non-finite codebook entry");
        }
    }
    if (idx.lists.size() != idx.nlist) {
        throw std::invalid_argument("index: list count differs from nlist");
    }
    std::vector<bool> seen(idx.ntotal, false);
    std::uint64_t total = 0;
    for (const auto& list : idx.lists) {
        if (list.codes.size() != list.ids.size() * cb.s) {
            throw std::invalid_argument("index: code bytes do not match list length");
        }
        for (std::size_t i = 0; i < list.ids.size(); ++i) {
            const auto id = list.ids[i];
            if (id >= idx.ntotal) {
                throw std::invalid_argument("index: id " + std::to_string(id) + " out of range");
            }
            if (seen[id]) {
                throw std::invalid_argument("index: id " + std::to_string(id) + " appears twice");
            }
            if (i > 0 && list.ids[i - 1] >= id) {
                throw std::invalid_argument("index: list ids not ascending");
            }
            seen[id] = true;
        }
        for (const auto byte : list.codes) {
            if (byte >= cb.ksub()) {
                throw std::invalid_argument("index: code byte exceeds 2^p");
            }
        }
        total += list.ids.size();
    }
    if (total != idx.ntotal) {
        throw std::invalid_argument("index: lists hold " + std::to_string(total) + " ids, expected " +
                                    std::to_string(idx.ntotal));
    }
}

std::vector<std::uint8_t> serialize_index(const IvfPqIndex& idx) {
    Writer w;
    w.put_array(std::span<const char>(kMagic.data(), kMagic.size()));
    w.put(narrow_u32(idx.d, "d"));
    w.put(narrow_u32(idx.nlist, "nlist"));
    w.put(narrow_u32(idx.cb.s, "s"));
    w.put(narrow_u32(idx.cb.p, "p"));
    w.put(narrow_u32(idx.cb.sub_d, "sub_d"));
    w.put(static_cast<std::uint64_t>(idx.ntotal));
    w.put_array(std::span<const float>(idx.coarse.data));
    w.put_array(std::span<const float>(idx.cb.centers));
    for (const auto& list : idx.lists) {
        w.put(static_cast<std::uint64_t>(list.ids.size()));
        w.put_array(std::span<const std::uint64_t>(list.ids));
        w.put_array(std::span<const std::uint8_t>(list.codes));
    }
    return w.take();
}

IvfPqIndex deserialize_index(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMagic.size() ||
        std::memcmp(bytes.data(), kMagic.data(), 5) != 0) {
        throw std::runtime_error("not an index file (bad magic)");
    }
    if (std::memcmp(bytes.data(), kMagic.data(), kMagic.size()) != 0) {
        throw std::runtime_error("unsupported index version '" +
                                 std::string(reinterpret_cast<const char*>(bytes.data()) + 5, 3) + "', expected '001'");
    }
    Reader r(bytes.subspan(kMagic.size()));
    IvfPqIndex idx;
    idx.d = r.get<std::uint32_t>();
    idx.nlist = r.get<std::uint32_t>();
    idx.cb.s = r.get<std::uint32_t>();
    idx.cb.p = r.get<std::uint32_t>();
    idx.cb.sub_d = r.get<std::uint32_t>();
    idx.ntotal = r.get<std::uint64_t>();
    if (idx.d == 0 || idx.nlist == 0 || idx.cb.p < 1 || idx.cb.p > 8 || idx.cb.s * idx.cb.sub_d != idx.d) {
        throw std::runtime_error("index header inconsistent");
    }
    // Bound every allocation by the bytes actually present.
    const auto need_floats = [&](std::size_t count) {
        if (count > r.remaining() / sizeof(float)) {
            throw std::runtime_error("truncated index file");
        }
    };
    need_floats(idx.nlist * idx.d);
    idx.coarse = VectorSet(idx.nlist, idx.d);
    r.get_array(std::span<float>(idx.coarse.data));
    need_floats(idx.cb.s * idx.cb.ksub() * idx.cb.sub_d);
    idx.cb.centers.resize(idx.cb.s * idx.cb.ksub() * idx.cb.sub_d);
    r.get_array(std::span<float>(idx.cb.centers));

    idx.lists.resize(idx.nlist);
    for (auto& list : idx.lists) {
        const auto length = r.get<std::uint64_t>();
        if (length > r.remaining() / (sizeof(std::uint64_t) + idx.cb.s)) {
            throw std::runtime_error("truncated index file: list length exceeds remaining bytes");
        }
        list.ids.resize(length);
        r.get_array(std::span<std::uint64_t>(list.ids));
        list.codes.resize(length * idx.cb.s);
        r.get_array(std::span<std::uint8_t>(list.codes));
    }
    if (r.remaining() != 0) {
        throw std::runtime_error("trailing bytes after index data");
    }
    std::uint64_t total = 0;
    for (const auto& list : idx.lists) {
        total += list.ids.size();
    }
    if (total != idx.ntotal) {
        throw std::runtime_error("invalid index file: header declares " + std::to_string(idx.ntotal) +
                                 " vectors, lists hold " + std::to_string(total));
    }
    try {
        validate(idx);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("invalid index file: ") + e.what());
    }
    return idx;
}

void save_index(const IvfPqIndex& idx, const std::filesystem::path& path) {
    const auto bytes = serialize_index(idx);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot create " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

IvfPqIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return deserialize_index(bytes);
}

}  // namespace fp8ann
