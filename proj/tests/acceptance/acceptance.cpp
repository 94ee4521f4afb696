// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include "safs/cli.hpp"
#include "safs/pipeline.hpp"

#include "../oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace safs;
namespace fs = std::filesystem;

namespace {

const fs::path kData = SAFS_DATA_DIR;
const std::vector<std::uint64_t> kSeeds{1, 2, 3};
constexpr std::uint64_t kFixedSeed = 1;

std::size_t workers() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[miss] ";
        }
        detail << what << "; ";
    }
};

int failures = 0;

void report(int id, const char* name, Outcome& o) {
    std::printf("%s  %d. %s: %s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pct(double fraction) { return fixed(100.0 * fraction, 2); }

// Train, rank and select with the pipeline; Stage::stepwise adds both curves.
PipelineResult run_dataset(const std::string& name, std::uint64_t seed, std::size_t top_k, Stage last) {
    const auto raw = load_csv((kData / (name + ".csv")).string(), "class");
    PipelineConfig cfg;
    cfg.dataset_name = name;
    cfg.seed = seed;
    cfg.selection.top_k = top_k;
    cfg.workers = workers();
    cfg.last_stage = last;
    auto r = run_pipeline(raw, cfg);
    if (last == Stage::select) {
        TrainConfig train_cfg;
        train_cfg.seed = derive_stage_seeds(seed).train;
        r.comparison = compare(r.prepared.data, r.selection, train_cfg, name, &r.training->best_params);
    }
    return r;
}

std::size_t position(const std::vector<std::size_t>& ranking, std::size_t feature) {
    return static_cast<std::size_t>(std::find(ranking.begin(), ranking.end(), feature) - ranking.begin());
}

void ishigami_oracle() {
    Outcome o;
    const auto mc = oracle::jansen_total_indices(oracle::ishigami, oracle::ishigami_box(), 50000, 2024);
    const double pi = std::numbers::pi;
    efast::InputSpace space{{{-pi, pi}, {-pi, pi}, {-pi, pi}}};
    const auto te = efast::total_effects(
        [](std::span<const double> x) { return oracle::ishigami({x.begin(), x.end()}); }, space, efast::EfastConfig{});
    for (std::size_t h = 0; h < 3; ++h)
        o.require(std::abs(te[h] - mc[h]) <= 0.05,
                  "TE" + std::to_string(h + 1) + " efast " + fixed(te[h]) + " vs oracle " + fixed(mc[h]));
    report(1, "EFAST matches a 250000-evaluation Monte-Carlo total-index oracle on Ishigami (+-0.05)", o);
}

void pure_factor() {
    Outcome o;
    const double pi = std::numbers::pi;
    efast::InputSpace space{std::vector<Range>(6, Range{-pi, pi})};
    double worst_signal = 1.0, worst_dummy = 0.0;
    for (std::size_t target = 0; target < 6; ++target) {
        const auto te = efast::total_effects([target](std::span<const double> x) { return std::sin(x[target]); },
                                             space, efast::EfastConfig{});
        for (std::size_t h = 0; h < 6; ++h) {
            if (h == target) worst_signal = std::min(worst_signal, te[h]);
            else worst_dummy = std::max(worst_dummy, te[h]);
        }
    }
    o.require(worst_signal >= 0.98, "min signal TE " + fixed(worst_signal));
    o.require(worst_dummy <= 0.02, "max dummy TE " + fixed(worst_dummy));
    report(2, "sin(x_h) with 5 dummy factors: TE_h >= 0.98, dummies <= 0.02", o);
}

void gradient_check() {
    Outcome o;
    Rng rng(77);
    double worst = 0.0;
    const int networks = 200;
    for (int trial = 0; trial < networks; ++trial) {
        const std::size_t H = 1 + rng.below(8), N = 1 + rng.below(8), K = 2 + rng.below(7);
        const auto p = init_params(H, N, K, rng.next());
        std::vector<double> x(H);
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        const std::size_t label = rng.below(K);
        worst = std::max(worst, oracle::max_relative_error(backward(p, x, label), oracle::numeric_gradient(p, x, label)));
    }
    o.require(worst <= 1e-4, std::to_string(networks) + " networks, max relative error " + std::to_string(worst));
    report(3, "backward matches central finite differences (step 1e-5, rel err <= 1e-4)", o);
}

void table_reproduction(std::map<std::string, PipelineResult>& cache) {
    Outcome o;
    const auto row = [&](const std::string& name, std::size_t k) -> const ComparisonRow& {
        const auto key = name + "#" + std::to_string(kFixedSeed);
        if (!cache.count(key)) cache[key] = run_dataset(name, kFixedSeed, k, Stage::select);
        return cache[key].comparison;
    };
    const auto summary = [](const ComparisonRow& r) {
        return r.dataset_name + " full " + pct(r.full_accuracy) + " / top-" + std::to_string(r.selected_feature_count) +
               " " + pct(r.selected_accuracy);
    };

    const auto& mush = row("mushrooms", 7);
    o.require(mush.full_accuracy >= 0.995 && mush.selected_accuracy >= 0.990, summary(mush) + " (need >= 99.5 / 99.0)");
    const auto& wave = row("waveform", 11);
    o.require(std::abs(100 * wave.full_accuracy - 85.04) <= 2.0, summary(wave) + ": full within 2.0 of 85.04");
    o.require(std::abs(wave.selected_accuracy - wave.full_accuracy) <= 0.020, "waveform top-11 within 2.0 of full");
    const auto& dia = row("diabetes", 2);
    o.require(std::abs(dia.selected_accuracy - dia.full_accuracy) <= 0.030, summary(dia) + " (within 3.0)");
    const auto& yeast = row("yeast", 6);
    o.require(std::abs(yeast.selected_accuracy - yeast.full_accuracy) <= 0.025, summary(yeast) + " (within 2.5)");
    const auto& letter = row("letter", 11);
    o.require(std::abs(letter.selected_accuracy - letter.full_accuracy) <= 0.025, summary(letter) + " (within 2.5)");
    report(4, "full vs selected-subset test accuracy on the five datasets (seed 1)", o);
}

void waveform_ranking(std::map<std::string, PipelineResult>& cache) {
    Outcome o;
    for (auto seed : kSeeds) {
        const auto key = "waveform-curves#" + std::to_string(seed);
        if (!cache.count(key)) cache[key] = run_dataset("waveform", seed, 11, Stage::stepwise);
        const auto& ranking = cache[key].report.ranking;
        const std::size_t H = ranking.size();
        const auto p10 = position(ranking, 9), p11 = position(ranking, 10);
        const auto p1 = position(ranking, 0), p2 = position(ranking, 1);
        o.require(p10 < 4 && p11 < 4 && p1 >= H - 6 && p2 >= H - 6,
                  "seed " + std::to_string(seed) + ": ranks x10 " + std::to_string(p10 + 1) + ", x11 " +
                      std::to_string(p11 + 1) + ", x1 " + std::to_string(p1 + 1) + ", x2 " + std::to_string(p2 + 1));
    }
    report(5, "waveform: x10 and x11 in the top 4, x1 and x2 in the bottom 6, seeds 1-3", o);
}

void descending_dominance(std::map<std::string, PipelineResult>& cache) {
    Outcome o;
    for (const std::string name : {"waveform", "mushrooms"}) {
        for (auto seed : kSeeds) {
            const auto key = name + "-curves#" + std::to_string(seed);
            if (!cache.count(key)) cache[key] = run_dataset(name, seed, 7, Stage::stepwise);
            const auto& r = cache[key];
            const double asc = area_under_curve(r.ascending), desc = area_under_curve(r.descending);
            o.require(desc > asc, name + " seed " + std::to_string(seed) + ": descending " + fixed(desc, 3) +
                                      " vs ascending " + fixed(asc, 3));
        }
    }
    report(6, "area under the descending curve exceeds the ascending one (waveform, mushrooms, seeds 1-3)", o);
}

std::map<std::string, std::string> files_in(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = io::read_text(e.path());
    return out;
}

void property_suite(const std::map<std::string, PipelineResult>& cache) {
    Outcome o;

    double worst_sum = 0.0;
    bool clamped = true, prefixes = true;
    for (const auto& [key, r] : cache) {
        double sum = 0.0;
        for (double c : r.report.contributions) sum += c;
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        for (double v : r.report.te_matrix.values()) clamped = clamped && v >= 0.0 && v <= 1.0;
        for (const auto* curve : {&r.ascending, &r.descending})
            for (std::size_t t = 1; t < curve->steps.size(); ++t) {
                const auto& prev = curve->steps[t - 1].subset;
                const auto& cur = curve->steps[t].subset;
                prefixes = prefixes && cur.size() == t + 1 && std::equal(prev.begin(), prev.end(), cur.begin());
            }
    }
    o.require(worst_sum <= 1e-9, "max |sum C_h - 1| " + std::to_string(worst_sum) + " over " +
                                     std::to_string(cache.size()) + " reports");
    o.require(clamped, "every TE in [0, 1]");
    o.require(prefixes, "stepwise subsets are prefixes");

    const auto diabetes = encode(load_csv((kData / "diabetes.csv").string(), "class"));
    const auto a = split(diabetes, {}, 5), b = split(diabetes, {}, 5);
    bool partition = a.train.samples() + a.validation.samples() + a.test.samples() == diabetes.samples();
    partition = partition && a.train.features == b.train.features && a.test.labels == b.test.labels;
    o.require(partition, "diabetes split is deterministic and sizes sum to " + std::to_string(diabetes.samples()));

    const auto tmp = fs::temp_directory_path() / "safs_acceptance";
    fs::remove_all(tmp);
    const auto data = (kData / "diabetes.csv").string();
    std::ostringstream sink;
    int codes = 0;
    for (const std::string w : {"1", "8"}) {
        const auto parsed = cli::parse_args({"reproduce", data, "--label", "class", "--top-k", "2", "--seed", "42",
                                             "--workers", w, "--out", (tmp / ("w" + w)).string()},
                                            sink, sink);
        codes += parsed.config ? cli::run(*parsed.config, sink, sink) : 1;
    }
    o.require(codes == 0 && files_in(tmp / "w1") == files_in(tmp / "w8"),
              "--workers 1 and --workers 8 artifacts byte-identical");
    report(7, "property suite", o);
}

} // namespace

int main() {
    std::printf("acceptance run, data from %s, %zu worker thread(s)\n", kData.string().c_str(), workers());
    std::map<std::string, PipelineResult> cache;
    ishigami_oracle();
    pure_factor();
    gradient_check();
    table_reproduction(cache);
    waveform_ranking(cache);
    descending_dominance(cache);
    property_suite(cache);
    std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
