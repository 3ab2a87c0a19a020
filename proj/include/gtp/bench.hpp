#pragma once

#include <chrono>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "gtp/convolution.hpp"
#include "gtp/many_body.hpp"
#include "gtp/oracle.hpp"
#include "gtp/tensor_product.hpp"

namespace gtp::bench {

enum class OpClass { kFeatureInteraction, kConvolution, kManyBody };

inline const char* op_class_name(OpClass op) {
    switch (op) {
        case OpClass::kFeatureInteraction: return "feature_interaction";
        case OpClass::kConvolution: return "convolution";
        case OpClass::kManyBody: return "many_body";
    }
    return "?";
}

struct BenchConfig {
    OpClass op = OpClass::kFeatureInteraction;
    std::vector<int> degrees;
    int channels = 1;
    int batch = 1;
    int nu = 2;       // many_body only
    int repeats = 5;  // >= 3
    int warmup = 1;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const {
        if (degrees.empty()) throw std::domain_error("bench: empty degree list");
        for (int L : degrees)
            if (L < 1 || L > kMaxDegree)
                throw std::domain_error("bench: degrees must be in [1, 32]");
        if (channels < 1 || batch < 1) throw std::domain_error("bench: bad shape");
        if (repeats < 3) throw std::domain_error("bench: repeats must be >= 3");
        if (warmup < 0) throw std::domain_error("bench: negative warmup");
        if (nu < 1 || nu > 16) throw std::domain_error("bench: nu must be in [1, 16]");
    }
};

struct BenchRow {
    std::string op_class, path;
    int L = 0, channels = 0, batch = 0, nu = 0;
    int repeat = 0;  ///< -1 marks the median row
    std::int64_t wall_ns = 0;
    std::uint64_t work_ops = 0;
};

inline void write_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
    os << "op_class,path,L,channels,batch,nu,repeat,wall_ns,work_ops\n";
    for (const auto& r : rows)
        os << r.op_class << ',' << r.path << ',' << r.L << ',' << r.channels
           << ',' << r.batch << ',' << r.nu << ',' << r.repeat << ','
           << r.wall_ns << ',' << r.work_ops << '\n';
}

namespace detail {

inline FeatureBatch random_batch(int B, int C, int L, std::mt19937_64& rng) {
    FeatureBatch f(B, C, L);
    std::normal_distribution<double> nd;
    for (auto& v : f.data) v = nd(rng);
    return f;
}

/// Leading-order analytic multiply-add models per path. The fractional
/// (2l+1)-style corrections are deliberately dropped so the CSV reflects
/// the asymptotic cost law; wall_ns carries the measured reality.
inline std::uint64_t model_ops(const std::string& path, int L, int B, int C) {
    const std::uint64_t bc = static_cast<std::uint64_t>(B) * C;
    const std::uint64_t l = static_cast<std::uint64_t>(L);
    if (path == "gaunt_fft") return bc * 4 * l * l * l;
    if (path == "oracle_gaunt" || path == "oracle_cg")
        return bc * l * l * l * l * l * l;
    if (path == "sparse_filter") return bc * l * l;
    if (path == "dense_filter") return bc * l * l * l;
    return 0;
}

template <typename Fn>
void time_path(std::vector<BenchRow>& rows, const BenchConfig& cfg,
               const std::string& path, int L, std::uint64_t work_ops,
               Fn&& run) {
    for (int i = 0; i < cfg.warmup; ++i) run();
    std::vector<std::int64_t> walls;
    walls.reserve(cfg.repeats);
    for (int rep = 0; rep < cfg.repeats; ++rep) {
        const auto t0 = std::chrono::steady_clock::now();
        run();
        const auto t1 = std::chrono::steady_clock::now();
        const auto ns =
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
        walls.push_back(ns);
        rows.push_back({op_class_name(cfg.op), path, L, cfg.channels, cfg.batch,
                        cfg.nu, rep, ns, work_ops});
    }
    std::sort(walls.begin(), walls.end());
    const std::int64_t med = walls[walls.size() / 2];
    rows.push_back({op_class_name(cfg.op), path, L, cfg.channels, cfg.batch,
                    cfg.nu, -1, med, work_ops});
}

}  // namespace detail

/// Run the configured benchmark; wall times exclude table construction
/// (tables are warmed before the timed region).
inline std::vector<BenchRow> run_bench(const BenchConfig& cfg,
                                       TableCache& tables) {
    cfg.validate();
    std::vector<BenchRow> rows;
    volatile double sink = 0.0;  // keep the optimizer honest

    for (int L : cfg.degrees) {
        std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ull * (L + 1)));
        tables.get(L);
        tables.get(2 * L);

        switch (cfg.op) {
            case OpClass::kFeatureInteraction: {
                const FeatureBatch X =
                    detail::random_batch(cfg.batch, cfg.channels, L, rng);
                const FeatureBatch Y =
                    detail::random_batch(cfg.batch, cfg.channels, L, rng);
                const DegreeWeights ones(L, 1.0);
                detail::time_path(
                    rows, cfg, "gaunt_fft", L,
                    detail::model_ops("gaunt_fft", L, cfg.batch, cfg.channels),
                    [&] {
                        auto out = gaunt_tp_batch(X, Y, ChannelMode::channel_wise(),
                                                  ones, ones, ones, L, tables,
                                                  cfg.threads);
                        sink = sink + out.data[0];
                    });
                detail::time_path(
                    rows, cfg, "oracle_gaunt", L,
                    detail::model_ops("oracle_gaunt", L, cfg.batch, cfg.channels),
                    [&] {
                        for (int b = 0; b < cfg.batch; ++b)
                            for (int c = 0; c < cfg.channels; ++c)
                                sink = sink + oracle::gaunt_tp_reference(
                                                  X.get(b, c), Y.get(b, c), L)
                                                  .data[0];
                    });
                detail::time_path(
                    rows, cfg, "oracle_cg", L,
                    detail::model_ops("oracle_cg", L, cfg.batch, cfg.channels),
                    [&] {
                        for (int b = 0; b < cfg.batch; ++b)
                            for (int c = 0; c < cfg.channels; ++c)
                                sink = sink + oracle::cg_tp_reference(
                                                  X.get(b, c), Y.get(b, c), L)
                                                  .data[0];
                    });
                break;
            }
            case OpClass::kConvolution: {
                const FeatureBatch X =
                    detail::random_batch(cfg.batch, cfg.channels, L, rng);
                std::normal_distribution<double> nd;
                FilterWeights h;
                h.h.resize(L + 1);
                for (auto& v : h.h) v = nd(rng);
                Vec3 dir{nd(rng), nd(rng), nd(rng)};
                dir = dir.normalized();
                const EdgeGeometry edge = edge_frame(Vec3{0, 0, 0}, dir);
                const IrrepsVector filter_sh = eval_sh_vector(L, edge.unit);
                const DegreeWeights ones(L, 1.0), wh(L, h.h);
                detail::time_path(
                    rows, cfg, "sparse_filter", L,
                    detail::model_ops("sparse_filter", L, cfg.batch, cfg.channels),
                    [&] {
                        for (int b = 0; b < cfg.batch; ++b)
                            for (int c = 0; c < cfg.channels; ++c)
                                sink = sink + equiv_convolution(X.get(b, c), edge,
                                                                h, L, tables)
                                                  .data[0];
                    });
                detail::time_path(
                    rows, cfg, "dense_filter", L,
                    detail::model_ops("dense_filter", L, cfg.batch, cfg.channels),
                    [&] {
                        for (int b = 0; b < cfg.batch; ++b)
                            for (int c = 0; c < cfg.channels; ++c)
                                sink = sink + gaunt_weighted_tp(X.get(b, c),
                                                                filter_sh, ones,
                                                                wh, ones, L,
                                                                tables)
                                                  .data[0];
                    });
                break;
            }
            case OpClass::kManyBody: {
                tables.get(cfg.nu * L);
                const FeatureBatch X =
                    detail::random_batch(cfg.batch, cfg.channels, L, rng);
                auto run_strategy = [&](MultiTpStrategy s, OpCounter* ctr) {
                    for (int b = 0; b < cfg.batch; ++b)
                        for (int c = 0; c < cfg.channels; ++c) {
                            std::vector<IrrepsVector> ops(cfg.nu, X.get(b, c));
                            sink = sink + multi_tp(ops, L, tables, s, ctr).data[0];
                        }
                };
                // counted FFT points (deterministic) double as work_ops here
                OpCounter ct, cl;
                run_strategy(MultiTpStrategy::kBalancedTree, &ct);
                run_strategy(MultiTpStrategy::kLeftFold, &cl);
                detail::time_path(rows, cfg, "tree", L, ct.fft_points, [&] {
                    run_strategy(MultiTpStrategy::kBalancedTree, nullptr);
                });
                detail::time_path(rows, cfg, "leftfold", L, cl.fft_points, [&] {
                    run_strategy(MultiTpStrategy::kLeftFold, nullptr);
                });
                break;
            }
        }
    }
    (void)sink;
    return rows;
}

}  // namespace gtp::bench
