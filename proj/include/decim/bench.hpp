// Benchmark harness for the decimation filters. Timing is taken through an
// injectable clock so result formatting can be tested against fixed samples.
#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "decim/baseline.hpp"
#include "decim/core.hpp"
#include "decim/decimate.hpp"
#include "decim/exec.hpp"

namespace decim {

struct BenchRecord {
    std::string impl;  // bucket-parallel, bucket-serial or voxel-centroid
    float resolution_m = 0;
    unsigned threads = 1;
    int repetitions = 0;
    double mean_ms = 0;
    double stddev_ms = 0;
    std::size_t input_size = 0;
    std::size_t output_size = 0;
};

struct BenchConfig {
    std::vector<float> resolutions{0.02f, 0.04f, 0.05f};
    std::vector<std::string> impls{"bucket-parallel", "bucket-serial", "voxel-centroid"};
    std::vector<unsigned> thread_counts{0};  // bucket-parallel only; 0 = all cores
    int repetitions = 10;
    int warmup = 2;
    float radius = 0.0f;  // 0 = auto, 90% of the largest radius the grid admits
    int threshold = 5;
    std::size_t batch_size = 1000;
    std::uint64_t seed = 0;
    std::function<double()> clock;   // seconds; defaults to the monotonic clock
    std::ostream* log = nullptr;     // per-resolution setup notes, if wanted
};

/// Grid exponent for a target cell edge: cells of roughly `resolution` meters
/// across the largest cloud extent, clamped to the exponents the filter is
/// meant to run at.
inline int resolution_to_exponent(float max_extent, float resolution) {
    if (!(resolution > 0))
        throw ConfigError("resolution must be positive");
    int n = GridParams::kRecommendedMinExponent;
    if (max_extent > 0) {
        const double raw = std::ceil(std::log2(static_cast<double>(max_extent) /
                                               static_cast<double>(resolution)));
        if (raw > n)
            n = static_cast<int>(raw);
        if (n > GridParams::kRecommendedMaxExponent)
            n = GridParams::kRecommendedMaxExponent;
    }
    return n;
}

namespace detail {

inline void mean_stddev(const std::vector<double>& samples, double& mean, double& stddev) {
    mean = 0;
    for (double s : samples)
        mean += s;
    mean /= static_cast<double>(samples.size());
    double acc = 0;
    for (double s : samples) {
        const double d = s - mean;
        acc += d * d;
    }
    // sample standard deviation; callers guarantee at least 3 repetitions
    stddev = std::sqrt(acc / static_cast<double>(samples.size() - 1));
}

}  // namespace detail

/// Runs every impl/resolution/thread combination over the same cloud. Each
/// combination repeats `repetitions` times after `warmup` unrecorded runs, and
/// every repetition must produce the same output cloud.
inline std::vector<BenchRecord> run_bench(const PointCloud& cloud, const BenchConfig& cfg) {
    if (cloud.empty())
        throw ConfigError("run_bench: the cloud is empty");
    if (cfg.repetitions < 3)
        throw ConfigError("run_bench: need at least 3 repetitions for a stddev");
    if (cfg.warmup < 0)
        throw ConfigError("run_bench: warmup must be nonnegative");
    if (cfg.resolutions.empty() || cfg.impls.empty() || cfg.thread_counts.empty())
        throw ConfigError("run_bench: resolutions, impls and thread_counts must be nonempty");
    for (const std::string& impl : cfg.impls)
        if (impl != "bucket-parallel" && impl != "bucket-serial" && impl != "voxel-centroid")
            throw ConfigError("run_bench: unknown impl '" + impl + "'");

    const std::function<double()> clock = cfg.clock ? cfg.clock : []() {
        return monotonic_seconds();
    };
    const Aabb box = compute_aabb(cloud);
    const float max_extent = std::max({box.max.x - box.min.x, box.max.y - box.min.y,
                                       box.max.z - box.min.z});

    std::vector<BenchRecord> records;
    for (float resolution : cfg.resolutions) {
        const int n = resolution_to_exponent(max_extent, resolution);
        FilterConfig fcfg;
        fcfg.n = n;
        fcfg.radius = cfg.radius > 0 ? cfg.radius
                                     : 0.9f * max_admissible_radius(box, n);
        fcfg.threshold = cfg.threshold;
        fcfg.batch_size = cfg.batch_size;
        fcfg.seed = cfg.seed;
        if (cfg.log) {
            char note[160];
            std::snprintf(note, sizeof(note),
                          "[bench] resolution %.4g m -> n=%d, radius %.4g m\n",
                          static_cast<double>(resolution), n,
                          static_cast<double>(fcfg.radius));
            *cfg.log << note;
        }

        for (const std::string& impl : cfg.impls) {
            const std::vector<unsigned> thread_list =
                impl == "bucket-parallel" ? cfg.thread_counts : std::vector<unsigned>{1};
            for (unsigned requested : thread_list) {
                const unsigned threads =
                    impl == "bucket-parallel" ? resolve_thread_count(requested) : 1;
                auto run_once = [&]() -> PointCloud {
                    if (impl == "voxel-centroid")
                        return voxel_centroid_filter(cloud, LeafSize{resolution});
                    if (impl == "bucket-serial")
                        return decimate(cloud, fcfg, 1).cloud;
                    return decimate(cloud, fcfg, threads).cloud;
                };

                for (int w = 0; w < cfg.warmup; ++w)
                    (void)run_once();

                PointCloud reference;
                std::vector<double> samples;
                samples.reserve(static_cast<std::size_t>(cfg.repetitions));
                for (int r = 0; r < cfg.repetitions; ++r) {
                    const double t0 = clock();
                    PointCloud out = run_once();
                    const double t1 = clock();
                    samples.push_back((t1 - t0) * 1000.0);
                    if (r == 0)
                        reference = std::move(out);
                    else if (out != reference)
                        throw Error("run_bench: " + impl +
                                    " produced different outputs across repetitions");
                }

                BenchRecord rec;
                rec.impl = impl;
                rec.resolution_m = resolution;
                rec.threads = threads;
                rec.repetitions = cfg.repetitions;
                detail::mean_stddev(samples, rec.mean_ms, rec.stddev_ms);
                rec.input_size = cloud.size();
                rec.output_size = reference.size();
                records.push_back(std::move(rec));
            }
        }
    }
    return records;
}

namespace detail {

inline std::string format_record_fields(const BenchRecord& r, const char* sep) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s%s%.6g%s%u%s%d%s%.4f%s%.4f%s%zu%s%zu",
                  r.impl.c_str(), sep, static_cast<double>(r.resolution_m), sep, r.threads,
                  sep, r.repetitions, sep, r.mean_ms, sep, r.stddev_ms, sep, r.input_size,
                  sep, r.output_size);
    return buf;
}

}  // namespace detail

inline const char* kBenchCsvHeader =
    "impl,resolution_m,threads,repetitions,mean_ms,stddev_ms,input_size,output_size";

inline std::string format_csv(const std::vector<BenchRecord>& records) {
    std::string out = kBenchCsvHeader;
    out += '\n';
    for (const BenchRecord& r : records) {
        out += detail::format_record_fields(r, ",");
        out += '\n';
    }
    return out;
}

inline void emit_csv(const std::vector<BenchRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("emit_csv: cannot open '" + path + "' for writing");
    out << format_csv(records);
    out.flush();
    if (!out)
        throw IoError("emit_csv: failed while writing '" + path + "'");
}

/// Plain-text table with the same columns as the CSV.
inline std::string format_table(const std::vector<BenchRecord>& records) {
    std::vector<std::vector<std::string>> rows;
    {
        std::vector<std::string> header;
        std::string col;
        for (const char* c = kBenchCsvHeader;; ++c) {
            if (*c == ',' || *c == '\0') {
                header.push_back(col);
                col.clear();
                if (*c == '\0')
                    break;
            } else {
                col += *c;
            }
        }
        rows.push_back(std::move(header));
    }
    for (const BenchRecord& r : records) {
        const std::string joined = detail::format_record_fields(r, "\x1f");
        std::vector<std::string> cells;
        std::string cell;
        for (char c : joined) {
            if (c == '\x1f') {
                cells.push_back(cell);
                cell.clear();
            } else {
                cell += c;
            }
        }
        cells.push_back(cell);
        rows.push_back(std::move(cells));
    }

    std::vector<std::size_t> widths(rows[0].size(), 0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i)
            widths[i] = std::max(widths[i], row[i].size());

    std::string out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i == 0) {
                out += row[i];
                out.append(widths[i] - row[i].size(), ' ');
            } else {
                out += "  ";
                out.append(widths[i] - row[i].size(), ' ');
                out += row[i];
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace decim
