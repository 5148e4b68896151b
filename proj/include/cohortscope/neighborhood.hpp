#pragma once

#include "cohortscope/core.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <thread>
#include <vector>

// =============================================================================
// FILE: cohortscope/neighborhood.hpp
// BRIEF: Fixed-radius microenvironments of every cell
//
// N(a) = { b != a in the same sample : (xa-xb)^2 + (ya-yb)^2 <= r^2 }
//
// Candidates come from a uniform grid whose bucket edge is the radius, so a
// query touches the 3x3 block of buckets around the cell. Neighbor lists are
// stored CSR-style per sample and sorted by cell position in the sample.
// =============================================================================

namespace cohortscope {

/// Squared-distance test shared by every code path that decides membership.
inline bool within_radius(const CellRecord& a, const CellRecord& b, double radius_sq) noexcept {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return dx * dx + dy * dy <= radius_sq;
}

/// Neighbor lists and per-cell neighbor-type histograms for one sample.
struct SampleNeighborhoods {
    std::vector<std::uint32_t> offsets;    // size cells+1
    std::vector<CellIndex> neighbors;      // sorted within each cell's range
    std::vector<std::uint32_t> hist_offsets;  // size cells+1
    std::vector<TypeId> hist_types;        // ascending within each cell's range
    std::vector<std::uint32_t> hist_counts;

    std::size_t size() const noexcept { return offsets.empty() ? 0 : offsets.size() - 1; }

    std::span<const CellIndex> of(CellIndex c) const noexcept {
        return {neighbors.data() + offsets[c], neighbors.data() + offsets[c + 1]};
    }

    std::uint32_t degree(CellIndex c) const noexcept { return offsets[c + 1] - offsets[c]; }

    /// Number of neighbors of `c` having type `t`.
    std::uint32_t type_count(CellIndex c, TypeId t) const noexcept {
        const auto* first = hist_types.data() + hist_offsets[c];
        const auto* last = hist_types.data() + hist_offsets[c + 1];
        for (const auto* it = first; it != last; ++it) {
            if (*it == t) return hist_counts[static_cast<std::size_t>(it - hist_types.data())];
            if (*it > t) break;
        }
        return 0;
    }

    /// (type, count) pairs of distinct neighbor types, ascending by type.
    std::span<const TypeId> types_of(CellIndex c) const noexcept {
        return {hist_types.data() + hist_offsets[c], hist_types.data() + hist_offsets[c + 1]};
    }
    std::span<const std::uint32_t> counts_of(CellIndex c) const noexcept {
        return {hist_counts.data() + hist_offsets[c], hist_counts.data() + hist_offsets[c + 1]};
    }

    friend bool operator==(const SampleNeighborhoods&, const SampleNeighborhoods&) = default;
};

class NeighborhoodIndex {
public:
    NeighborhoodIndex() = default;
    NeighborhoodIndex(double radius, std::size_t type_count, std::map<std::string, SampleNeighborhoods> samples)
        : radius_(radius), type_count_(type_count), samples_(std::move(samples)) {}

    double radius() const noexcept { return radius_; }
    std::size_t type_count() const noexcept { return type_count_; }

    const SampleNeighborhoods& sample(const std::string& sample_id) const {
        auto it = samples_.find(sample_id);
        if (it == samples_.end()) throw NotFoundError("unknown sample '" + sample_id + "'", "sample");
        return it->second;
    }

    const std::map<std::string, SampleNeighborhoods>& samples() const noexcept { return samples_; }

    /// Dense histogram of neighbor types (length T) for one cell.
    std::vector<std::uint32_t> histogram(const std::string& sample_id, CellIndex c) const {
        const auto& s = sample(sample_id);
        std::vector<std::uint32_t> h(type_count_, 0);
        auto types = s.types_of(c);
        auto counts = s.counts_of(c);
        for (std::size_t i = 0; i < types.size(); ++i) h[types[i]] = counts[i];
        return h;
    }

    friend bool operator==(const NeighborhoodIndex&, const NeighborhoodIndex&) = default;

private:
    double radius_ = 0.0;
    std::size_t type_count_ = 0;
    std::map<std::string, SampleNeighborhoods> samples_;
};

namespace neighborhood_detail {

inline void fill_histograms(const Sample& sample, SampleNeighborhoods& out) {
    const std::size_t n = sample.cells.size();
    out.hist_offsets.assign(n + 1, 0);
    out.hist_types.clear();
    out.hist_counts.clear();
    std::vector<TypeId> scratch;
    for (std::size_t c = 0; c < n; ++c) {
        scratch.clear();
        for (CellIndex nb : out.of(static_cast<CellIndex>(c))) scratch.push_back(sample.cells[nb].type_id);
        std::sort(scratch.begin(), scratch.end());
        for (std::size_t i = 0; i < scratch.size();) {
            std::size_t j = i;
            while (j < scratch.size() && scratch[j] == scratch[i]) ++j;
            out.hist_types.push_back(scratch[i]);
            out.hist_counts.push_back(static_cast<std::uint32_t>(j - i));
            i = j;
        }
        out.hist_offsets[c + 1] = static_cast<std::uint32_t>(out.hist_types.size());
    }
}

inline SampleNeighborhoods build_sample(const Sample& sample, double radius) {
    const auto& cells = sample.cells;
    const std::size_t n = cells.size();
    const double radius_sq = radius * radius;

    double min_x = cells.front().x, min_y = cells.front().y;
    double max_x = min_x, max_y = min_y;
    for (const auto& c : cells) {
        min_x = std::min(min_x, c.x);
        min_y = std::min(min_y, c.y);
        max_x = std::max(max_x, c.x);
        max_y = std::max(max_y, c.y);
    }

    // Bucket edge slightly above the radius so rounding in the bucket
    // coordinate can never separate two in-range cells by more than one bucket.
    const double edge = radius * (1.0 + 1e-9);
    const double span = std::max(max_x - min_x, max_y - min_y) / edge;
    const bool use_grid = span < 1e15;

    struct Key {
        std::int64_t bx, by;
        CellIndex idx;
    };
    std::vector<Key> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t bx = 0, by = 0;
        if (use_grid) {
            bx = static_cast<std::int64_t>(std::floor((cells[i].x - min_x) / edge));
            by = static_cast<std::int64_t>(std::floor((cells[i].y - min_y) / edge));
        }
        keys[i] = {bx, by, static_cast<CellIndex>(i)};
    }
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        if (a.bx != b.bx) return a.bx < b.bx;
        if (a.by != b.by) return a.by < b.by;
        return a.idx < b.idx;
    });
    std::vector<std::int64_t> bucket_of_x(n), bucket_of_y(n);
    for (const auto& k : keys) {
        bucket_of_x[k.idx] = k.bx;
        bucket_of_y[k.idx] = k.by;
    }
    auto before = [](const Key& k, std::pair<std::int64_t, std::int64_t> b) {
        return k.bx < b.first || (k.bx == b.first && k.by < b.second);
    };

    SampleNeighborhoods out;
    out.offsets.assign(n + 1, 0);
    std::vector<CellIndex> scratch;
    for (std::size_t i = 0; i < n; ++i) {
        scratch.clear();
        if (use_grid) {
            const auto bx = bucket_of_x[i], by = bucket_of_y[i];
            for (std::int64_t dx = -1; dx <= 1; ++dx) {
                auto lo = std::lower_bound(keys.begin(), keys.end(), std::pair{bx + dx, by - 1}, before);
                auto hi = std::lower_bound(lo, keys.end(), std::pair{bx + dx, by + 2}, before);
                for (auto it = lo; it != hi; ++it) {
                    if (it->idx != i && within_radius(cells[i], cells[it->idx], radius_sq))
                        scratch.push_back(it->idx);
                }
            }
        } else {
            for (std::size_t j = 0; j < n; ++j)
                if (j != i && within_radius(cells[i], cells[j], radius_sq))
                    scratch.push_back(static_cast<CellIndex>(j));
        }
        std::sort(scratch.begin(), scratch.end());
        out.neighbors.insert(out.neighbors.end(), scratch.begin(), scratch.end());
        out.offsets[i + 1] = static_cast<std::uint32_t>(out.neighbors.size());
    }
    fill_histograms(sample, out);
    return out;
}

inline std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace neighborhood_detail

/// Builds the index for `project.radius`. Samples are processed on up to
/// `threads` workers (0 = hardware concurrency); the result does not depend
/// on the thread count.
inline NeighborhoodIndex build_index(const Project& project, unsigned threads = 0) {
    std::vector<const Sample*> work;
    for (const auto& [id, s] : project.samples) work.push_back(&s);
    std::vector<SampleNeighborhoods> built(work.size());

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, work.size())));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < work.size();)
            built[i] = neighborhood_detail::build_sample(*work[i], project.radius);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    std::map<std::string, SampleNeighborhoods> samples;
    for (std::size_t i = 0; i < work.size(); ++i) samples.emplace(work[i]->sample_id, std::move(built[i]));
    return NeighborhoodIndex(project.radius, project.type_count(), std::move(samples));
}

/// Neighbor cell ids of one cell, in sample order.
inline std::vector<std::string> neighbors_of(const Project& project, const NeighborhoodIndex& index,
                                             const std::string& sample_id, const std::string& cell_id) {
    const auto& sample = project.sample(sample_id);
    auto c = sample.find_cell(cell_id);
    if (!c) throw NotFoundError("unknown cell '" + cell_id + "' in sample '" + sample_id + "'", "cell");
    std::vector<std::string> ids;
    for (CellIndex nb : index.sample(sample_id).of(*c)) ids.push_back(sample.cells[nb].cell_id);
    return ids;
}

/// FNV-1a digest of everything the index depends on (cells, types, radius).
inline std::uint64_t content_hash(const Project& p) {
    using neighborhood_detail::fnv1a;
    std::uint64_t h = 1469598103934665603ULL;
    h = fnv1a(h, &p.radius, sizeof p.radius);
    for (const auto& label : p.catalog.labels()) h = fnv1a(h, label.c_str(), label.size() + 1);
    for (const auto& [id, s] : p.samples) {
        h = fnv1a(h, id.c_str(), id.size() + 1);
        for (const auto& c : s.cells) {
            h = fnv1a(h, c.cell_id.c_str(), c.cell_id.size() + 1);
            h = fnv1a(h, &c.x, sizeof c.x);
            h = fnv1a(h, &c.y, sizeof c.y);
            h = fnv1a(h, &c.type_id, sizeof c.type_id);
        }
    }
    return h;
}

// Cache file: "CSNBIDX1", u64 content hash, f64 radius, u64 sample count, then
// per sample: u64 id length, id bytes, u64 cell count, offsets (u32 x cells+1),
// neighbors (u32 x offsets.back()). Little-endian host layout. Histograms are
// rebuilt on load.

inline void save_index(const NeighborhoodIndex& index, const Project& project, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write index cache '" + path.string() + "'", path.string());
    auto put = [&](const void* p, std::size_t n) { out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); };
    const std::uint64_t hash = content_hash(project);
    const double radius = index.radius();
    const std::uint64_t count = index.samples().size();
    put("CSNBIDX1", 8);
    put(&hash, 8);
    put(&radius, 8);
    put(&count, 8);
    for (const auto& [id, s] : index.samples()) {
        const std::uint64_t len = id.size(), cells = s.size();
        put(&len, 8);
        put(id.data(), id.size());
        put(&cells, 8);
        put(s.offsets.data(), s.offsets.size() * sizeof(std::uint32_t));
        put(s.neighbors.data(), s.neighbors.size() * sizeof(CellIndex));
    }
    if (!out) throw Error("write failed for index cache '" + path.string() + "'", path.string());
}

/// Loads a cache written by save_index. Throws if it was built for different
/// project content or radius.
inline NeighborhoodIndex load_index(const Project& project, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read index cache '" + path.string() + "'", path.string());
    auto get = [&](void* p, std::size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in) throw Error("index cache '" + path.string() + "' is truncated", path.string());
    };
    char magic[8];
    get(magic, 8);
    if (std::memcmp(magic, "CSNBIDX1", 8) != 0) throw Error("not an index cache file", path.string());
    std::uint64_t hash = 0, count = 0;
    double radius = 0;
    get(&hash, 8);
    get(&radius, 8);
    get(&count, 8);
    if (hash != content_hash(project) || radius != project.radius)
        throw Error("index cache does not match the project content or radius", path.string());
    std::map<std::string, SampleNeighborhoods> samples;
    for (std::uint64_t k = 0; k < count; ++k) {
        std::uint64_t len = 0, cells = 0;
        get(&len, 8);
        std::string id(len, '\0');
        get(id.data(), len);
        get(&cells, 8);
        const auto& sample = project.sample(id);
        if (cells != sample.size()) throw Error("index cache cell count mismatch for '" + id + "'", path.string());
        SampleNeighborhoods s;
        s.offsets.resize(cells + 1);
        get(s.offsets.data(), s.offsets.size() * sizeof(std::uint32_t));
        if (s.offsets.front() != 0 || !std::is_sorted(s.offsets.begin(), s.offsets.end()))
            throw Error("index cache offsets are corrupt for '" + id + "'", path.string());
        s.neighbors.resize(s.offsets.back());
        get(s.neighbors.data(), s.neighbors.size() * sizeof(CellIndex));
        if (std::any_of(s.neighbors.begin(), s.neighbors.end(), [&](CellIndex c) { return c >= cells; }))
            throw Error("index cache neighbor ids are corrupt for '" + id + "'", path.string());
        neighborhood_detail::fill_histograms(sample, s);
        samples.emplace(std::move(id), std::move(s));
    }
    return NeighborhoodIndex(radius, project.type_count(), std::move(samples));
}

}  // namespace cohortscope
