// gtp: precompute coefficient caches, run the correctness suites, and
// benchmark the fast tensor-product paths against the reference ones.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "gtp/bench.hpp"
#include "gtp/selfcheck.hpp"

namespace fs = std::filesystem;

namespace {

fs::path resolve_cache_dir(const std::string& flag) {
    if (!flag.empty()) return fs::path(flag);
    if (auto env = gtp::env_cache_dir()) return *env;
    return fs::path("gtp-cache");
}

int cmd_tables(int lmax, const std::string& cache_flag) {
    const fs::path dir = resolve_cache_dir(cache_flag);
    gtp::TableCache tables(dir);
    std::mt19937_64 rng(2024);
    bool all_ok = true;
    for (int L = 0; L <= lmax; ++L) {
        const fs::path file = gtp::cache_file_path(dir, L);
        const bool existed = fs::exists(file);
        tables.get(L);  // load-or-build, persists on build

        // validate what is on disk: CRC via reload, then a round-trip probe
        auto reloaded = gtp::load_conversion_table(file);
        if (!reloaded || reloaded->L != L) {
            std::fprintf(stderr, "error: %s failed validation after write\n",
                         file.string().c_str());
            all_ok = false;
            continue;
        }
        gtp::IrrepsVector x(L);
        std::normal_distribution<double> nd;
        for (auto& v : x.data) v = nd(rng);
        const auto back =
            gtp::fourier_to_sh(gtp::sh_to_fourier(x, *reloaded), *reloaded, L);
        double resid = 0;
        for (std::size_t i = 0; i < x.data.size(); ++i)
            resid = std::max(resid, std::abs(x.data[i] - back.data[i]));
        const bool ok = resid < 1e-10;
        all_ok = all_ok && ok;
        std::printf("%s %s (%zu y + %zu z entries, round-trip %.2e)%s\n",
                    existed ? "kept " : "wrote", file.string().c_str(),
                    reloaded->y.size(), reloaded->z.size(), resid,
                    ok ? "" : "  FAILED");
    }
    return all_ok ? 0 : 1;
}

int cmd_verify(const std::string& level) {
    const bool full = level == "full";
    std::printf("running %s verification suite...\n", full ? "full" : "quick");
    const auto results = gtp::selfcheck::run_checks(full);
    int failures = 0;
    for (const auto& r : results) {
        std::printf("%-40s residual %10.3e  tol %8.1e  %5.2fs  %s\n",
                    r.name.c_str(), r.residual, r.tolerance, r.seconds,
                    r.pass ? "PASS" : "FAIL");
        if (!r.pass) ++failures;
    }
    std::printf("%d/%zu checks passed\n", static_cast<int>(results.size()) - failures,
                results.size());
    return failures == 0 ? 0 : 1;
}

int cmd_bench(const gtp::bench::BenchConfig& cfg, const std::string& out_path,
              const std::string& cache_flag) {
    const fs::path dir = resolve_cache_dir(cache_flag);
    gtp::TableCache tables(dir);

    // report tables that are about to be built rather than loaded
    for (int L : cfg.degrees) {
        const int need[] = {L, 2 * L,
                            cfg.op == gtp::bench::OpClass::kManyBody ? cfg.nu * L
                                                                     : L};
        for (int n : need) {
            const fs::path file = gtp::cache_file_path(dir, n);
            auto loaded = gtp::load_conversion_table(file);
            if (!loaded || loaded->L != n)
                std::fprintf(stderr, "note: cache miss, building table L=%d\n", n);
        }
    }

    const auto rows = gtp::bench::run_bench(cfg, tables);
    std::ofstream os(out_path, std::ios::trunc);
    if (!os) throw gtp::io_error("cannot open output file " + out_path);
    gtp::bench::write_csv(os, rows);
    if (!os.flush()) throw gtp::io_error("failed writing " + out_path);
    std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaunt tensor products via 2D Fourier transforms"};
    app.require_subcommand(1);

    auto* tables = app.add_subcommand("tables", "precompute coefficient caches");
    int lmax = 8;
    std::string cache_flag;
    tables->add_option("--lmax", lmax, "highest degree to precompute")
        ->required()
        ->check(CLI::Range(0, gtp::kMaxDegree));
    tables->add_option("--cache", cache_flag, "cache directory");

    auto* verify = app.add_subcommand("verify", "run the correctness suites");
    std::string level = "quick";
    verify->add_option("--level", level, "quick or full")
        ->check(CLI::IsMember({"quick", "full"}));

    auto* bench = app.add_subcommand("bench", "benchmark fast paths vs oracles");
    gtp::bench::BenchConfig cfg;
    std::string op_name, l_list, out_path;
    std::string bench_cache;
    bench->add_option("--op", op_name, "operation class")
        ->required()
        ->check(CLI::IsMember({"feature_interaction", "convolution", "many_body"}));
    bench->add_option("--l", l_list, "comma-separated degree list")->required();
    bench->add_option("--channels", cfg.channels, "channels per feature");
    bench->add_option("--batch", cfg.batch, "batch size");
    bench->add_option("--nu", cfg.nu, "tensor-product operand count (many_body)");
    bench->add_option("--repeats", cfg.repeats, "timed repetitions");
    bench->add_option("--warmup", cfg.warmup, "discarded warmup runs");
    bench->add_option("--seed", cfg.seed, "input sampling seed");
    bench->add_option("--threads", cfg.threads, "parallel batch processing");
    bench->add_option("--cache", bench_cache, "cache directory");
    bench->add_option("--out", out_path, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (tables->parsed()) return cmd_tables(lmax, cache_flag);
        if (verify->parsed()) return cmd_verify(level);
        if (bench->parsed()) {
            if (op_name == "feature_interaction")
                cfg.op = gtp::bench::OpClass::kFeatureInteraction;
            else if (op_name == "convolution")
                cfg.op = gtp::bench::OpClass::kConvolution;
            else
                cfg.op = gtp::bench::OpClass::kManyBody;
            cfg.degrees.clear();
            std::stringstream ss(l_list);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) cfg.degrees.push_back(std::stoi(tok));
            cfg.validate();
            return cmd_bench(cfg, out_path, bench_cache);
        }
    } catch (const gtp::io_error& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 3;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
