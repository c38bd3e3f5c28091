#include "lfs/store.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lfs {

namespace {

const char magic[6] = {'A', 'C', 'T', 'V', '1', '\0'};

template <class T>
void put_le(std::string& out, T v) {
    for (size_t i = 0; i < sizeof(T); ++i) out.push_back(char((uint64_t(v) >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const unsigned char* p) {
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= uint64_t(p[i]) << (8 * i);
    return T(v);
}

}  // namespace

std::string encode_shard(const std::vector<activation_record>& recs) {
    if (recs.empty()) throw error("empty shard");
    uint32_t d = recs[0].vec.size();
    if (d == 0) throw error("dimension mismatch: zero-length vector");
    std::string out;
    out.reserve(shard_header_bytes + recs.size() * shard_record_bytes(d));
    out.append(magic, 6);
    put_le<uint16_t>(out, 1);
    put_le<uint32_t>(out, d);
    put_le<uint64_t>(out, recs.size());
    put_le<uint32_t>(out, 0);
    for (size_t i = 0; i < recs.size(); ++i) {
        const auto& r = recs[i];
        if (r.vec.size() != d)
            throw error("dimension mismatch: record " + std::to_string(i) + " has " +
                        std::to_string(r.vec.size()) + " values, expected " + std::to_string(d));
        put_le<uint64_t>(out, r.prompt_id);
        put_le<uint16_t>(out, r.layer_index);
        put_le<uint32_t>(out, r.token_position);
        for (float f : r.vec) {
            if (!std::isfinite(f)) throw error("non-finite value in record " + std::to_string(i));
            uint32_t u;
            std::memcpy(&u, &f, 4);
            put_le<uint32_t>(out, u);
        }
    }
    return out;
}

std::vector<activation_record> decode_shard(std::string_view bytes) {
    auto p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 6 || std::memcmp(p, magic, 6) != 0) throw error("bad magic");
    if (bytes.size() < shard_header_bytes) throw error("truncated: incomplete header");
    uint16_t version = get_le<uint16_t>(p + 6);
    if (version != 1) throw error("unsupported shard version " + std::to_string(version));
    uint32_t d = get_le<uint32_t>(p + 8);
    uint64_t n = get_le<uint64_t>(p + 12);
    if (d == 0) throw error("bad header: d_model is 0");
    if (n == 0) throw error("empty shard");
    size_t rb = shard_record_bytes(d);
    size_t avail = (bytes.size() - shard_header_bytes) / rb;
    if (avail < n) throw error("truncated: header promises " + std::to_string(n) +
                               " records, file holds " + std::to_string(avail));
    if (bytes.size() != shard_header_bytes + n * rb) throw error("trailing bytes after last record");

    std::vector<activation_record> recs(n);
    const unsigned char* q = p + shard_header_bytes;
    for (uint64_t i = 0; i < n; ++i, q += rb) {
        auto& r = recs[i];
        r.prompt_id = get_le<uint64_t>(q);
        r.layer_index = get_le<uint16_t>(q + 8);
        r.token_position = get_le<uint32_t>(q + 10);
        r.vec.resize(d);
        for (uint32_t j = 0; j < d; ++j) {
            uint32_t u = get_le<uint32_t>(q + 14 + 4 * j);
            float f;
            std::memcpy(&f, &u, 4);
            if (!std::isfinite(f)) throw error("non-finite value in record " + std::to_string(i));
            r.vec[j] = f;
        }
    }
    return recs;
}

void write_file_atomic(const std::string& path, std::string_view bytes) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw error("cannot write " + path);
        f.write(bytes.data(), bytes.size());
        if (!f) throw error("write failed: " + path);
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw error("cannot rename into " + path + ": " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

shard_summary write_shard(const std::vector<activation_record>& recs, const std::string& path) {
    std::string bytes = encode_shard(recs);
    write_file_atomic(path, bytes);
    return {recs.size(), uint32_t(recs[0].vec.size()), fnv1a(bytes)};
}

std::vector<activation_record> read_shard(const std::string& path) {
    return decode_shard(read_file(path));
}

void write_manifest(const std::vector<manifest_record>& recs, const std::string& path) {
    std::string out;
    for (const auto& r : recs) {
        nlohmann::json j;
        j["kind"] = r.kind;
        j["ids"] = r.ids;
        if (r.label >= 0)
            j["label"] = r.label;
        else
            j["label"] = nullptr;
        out += j.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

std::vector<manifest_record> read_manifest(const std::string& path) {
    std::istringstream in(read_file(path));
    std::vector<manifest_record> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            manifest_record r;
            r.kind = j.at("kind").get<std::string>();
            r.ids = j.at("ids").get<std::vector<uint64_t>>();
            if (j.contains("label") && !j["label"].is_null()) r.label = j["label"].get<int>();
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw error(path + ":" + std::to_string(lineno) + ": bad manifest record: " + e.what());
        }
    }
    return out;
}

std::vector<manifest_record> to_manifest(const std::vector<layer_loc_pair>& p) {
    std::vector<manifest_record> out;
    for (auto& x : p) out.push_back({"layerloc", {x.m, x.n}, x.label});
    return out;
}

std::vector<manifest_record> to_manifest(const std::vector<contrastive_pair>& p) {
    std::vector<manifest_record> out;
    for (auto& x : p) out.push_back({"contrastive", {x.u, x.v}, -1});
    return out;
}

std::vector<layer_loc_pair> layer_loc_pairs(const std::vector<manifest_record>& m) {
    std::vector<layer_loc_pair> out;
    for (auto& r : m) {
        if (r.kind != "layerloc") continue;
        if (r.ids.size() != 2 || (r.label != 0 && r.label != 1))
            throw error("layerloc record needs two ids and a 0/1 label");
        out.push_back({r.ids[0], r.ids[1], r.label});
    }
    return out;
}

std::vector<contrastive_pair> contrastive_pairs(const std::vector<manifest_record>& m) {
    std::vector<contrastive_pair> out;
    for (auto& r : m) {
        if (r.kind != "contrastive") continue;
        if (r.ids.size() != 2) throw error("contrastive record needs two ids");
        if (r.ids[0] == r.ids[1]) throw error("contrastive pair references the same prompt twice");
        out.push_back({r.ids[0], r.ids[1]});
    }
    return out;
}

std::pair<std::vector<size_t>, std::vector<size_t>> split_indices(size_t n, int train_part,
                                                                  int test_part, uint64_t seed) {
    if (train_part <= 0 || test_part <= 0) throw error("ratio with zero part");
    if (n == 0) throw error("nothing to split");
    size_t n_test = n * size_t(test_part) / size_t(train_part + test_part);
    rng r(seed);
    auto perm = r.permutation(int(n));
    std::pair<std::vector<size_t>, std::vector<size_t>> out;
    for (size_t i = 0; i < n; ++i) (i < n - n_test ? out.first : out.second).push_back(perm[i]);
    return out;
}

void shard_set::add(activation_record r) {
    if (d_model == 0) d_model = r.vec.size();
    if (r.vec.size() != d_model) throw error("dimension mismatch across shards");
    auto key = std::make_pair(r.prompt_id, r.layer_index);
    auto it = last.find(key);
    if (it == last.end() || records[it->second].token_position <= r.token_position)
        last[key] = records.size();
    records.push_back(std::move(r));
}

void shard_set::add_all(std::vector<activation_record> rs) {
    for (auto& r : rs) add(std::move(r));
}

const activation_record* shard_set::last_token(uint64_t prompt_id, uint16_t layer) const {
    auto it = last.find({prompt_id, layer});
    return it == last.end() ? nullptr : &records[it->second];
}

std::set<uint16_t> shard_set::layers() const {
    std::set<uint16_t> s;
    for (auto& [k, _] : last) s.insert(k.second);
    return s;
}

}  // namespace lfs
