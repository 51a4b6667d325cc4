// End-to-end acceptance suite. Each criterion prints exactly one PASS/FAIL
// line with its runtime; the process exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "brainstorm/brainstorm.hpp"
#include "brainstorm/cli.hpp"
#include "helpers.hpp"

using namespace brainstorm;

namespace {

int failures = 0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

void criterion(int id, const char* summary, double time_limit_seconds,
               const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
        outcome = body();
    } catch (const std::exception& e) {
        outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < time_limit_seconds;
    const bool pass = outcome.pass && in_time;
    std::printf("[%s] criterion %d: %s (%.2fs%s)%s%s\n", pass ? "PASS" : "FAIL", id, summary,
                seconds, in_time ? "" : ", over time budget",
                outcome.detail.empty() ? "" : " -- ", outcome.detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::string num(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.4f", v);
    return buffer;
}

Outcome equation_hand_values() {
    const ConsensusConfig config;
    const std::vector<AgentProfile> half{{0.5, 0.5}, {0.5, 0.5}};
    const std::vector<Vote> agree{vote_plus, vote_plus};
    const std::vector<Vote> split{vote_plus, vote_minus};
    if (std::fabs(learning_impact(0, agree, half, config) - (-1.0)) > 1e-12) {
        return {false, "two-agent agreement impact != -1"};
    }
    if (std::fabs(learning_impact(0, split, half, config)) > 1e-12) {
        return {false, "two-agent split impact != 0"};
    }

    const std::vector<Vote> votes{vote_plus, vote_minus, vote_minus};
    const std::vector<AgentProfile> profiles{{0.9, 0.9}, {0.6, 0.6}, {0.6, 0.6}};
    const double m = weighted_margin(votes, profiles);
    if (std::fabs(m - (-1.0 / 7.0)) > 1e-12) return {false, "margin != -1/7"};
    if (decide(m).vote != vote_minus) return {false, "sign of -1/7 is not -1"};
    if (decide(0.3).vote != vote_plus || decide(0.3).tie) return {false, "sign of 0.3 wrong"};
    const Decision tie = decide(0.0);
    if (tie.vote != vote_plus || !tie.tie) return {false, "zero margin tie rule broken"};
    if (std::fabs(reliability(m) - 3.0 / 7.0) > 1e-12) return {false, "reliability != 3/7"};
    return {true, ""};
}

Outcome margin_bound_and_symmetries() {
    rng::Stream stream(20240207);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + stream.next_index(14);
        std::vector<Vote> votes;
        std::vector<AgentProfile> profiles;
        for (std::size_t i = 0; i < n; ++i) {
            votes.push_back(stream.next_unit() < 0.5 ? vote_plus : vote_minus);
            profiles.push_back({stream.next_uniform(0.02, 1.0), stream.next_uniform(0.02, 1.0)});
        }
        const double m = weighted_margin(votes, profiles);
        if (std::fabs(m) > 1.0) return {false, "margin escaped [-1, 1]"};

        std::vector<Vote> negated;
        for (Vote v : votes) negated.push_back(Vote{-v.value});
        if (weighted_margin(negated, profiles) != -m) {
            return {false, "vote negation did not negate the margin exactly"};
        }

        const double c = stream.next_uniform(1e-3, 10.0);
        std::vector<AgentProfile> scaled;
        for (const AgentProfile& p : profiles) scaled.push_back({p.precision * c, p.recall * c});
        if (std::fabs(weighted_margin(votes, scaled) - m) > 1e-12) {
            return {false, "profile scaling moved the margin"};
        }

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        stream.shuffle(order);
        std::vector<Vote> pv;
        std::vector<AgentProfile> pp;
        for (std::size_t idx : order) {
            pv.push_back(votes[idx]);
            pp.push_back(profiles[idx]);
        }
        const double mp = weighted_margin(pv, pp);
        if (std::fabs(mp - m) > 1e-12 || decide(mp).vote != decide(m).vote) {
            return {false, "agent permutation changed the consensus"};
        }
    }
    return {true, "10000 random ensembles"};
}

Outcome noiseless_limit() {
    rng::Stream stream(55);
    for (int instance = 0; instance < 1000; ++instance) {
        const std::size_t n = 1 + stream.next_index(10);
        std::vector<Vote> votes;
        std::vector<AgentProfile> profiles;
        for (std::size_t i = 0; i < n; ++i) {
            votes.push_back(stream.next_unit() < 0.5 ? vote_plus : vote_minus);
            profiles.push_back({stream.next_uniform(0.05, 1.0), stream.next_uniform(0.05, 1.0)});
        }
        const Decision base = decide(weighted_margin(votes, profiles));
        for (double temperature : {std::numeric_limits<double>::infinity(), 1e12}) {
            for (NoiseMode mode : {NoiseMode::site_dependent, NoiseMode::uniform_global}) {
                NoiseSpec noise;
                noise.mode = mode;
                noise.temperature = temperature;
                noise.seed = stream.next_u64();
                for (std::uint64_t draw = 0; draw < 3; ++draw) {
                    if (decide_noisy(votes, profiles, noise, draw).vote != base.vote) {
                        return {false, "noisy decision diverged at beta ~ 0"};
                    }
                }
            }
        }
    }
    return {true, "1000 instances, both modes, every draw"};
}

Outcome monte_carlo_vs_closed_form() {
    const double oracle3 = majority_accuracy_closed_form(3, 0.7);
    if (std::fabs(oracle3 - 0.784) > 1e-12) return {false, "binomial oracle(3, 0.7) != 0.784"};
    PopulationSpec population;  // point_mass(0.7, 0.7)
    NoiseSpec no_noise;
    const SweepGrid grid =
        run_sweep(population, {1, 3, 11, 25}, no_noise, {0.0}, 100000, 424242);
    std::string detail;
    for (std::size_t ni = 0; ni < grid.agent_counts.size(); ++ni) {
        const SweepCell& cell = grid.at(ni, 0);
        const double oracle = majority_accuracy_closed_form(cell.agent_count, 0.7);
        detail += (detail.empty() ? "" : ", ") + std::string("N=") +
                  std::to_string(cell.agent_count) + ": " + num(cell.accuracy) + " vs " +
                  num(oracle);
        if (std::fabs(cell.accuracy - oracle) >= 3.0 * cell.standard_error) {
            return {false, detail + " (outside 3 SE)"};
        }
    }
    return {true, detail};
}

Outcome noise_flip_rate_oracle() {
    const std::size_t n = 20;
    std::string detail;
    for (const double target_margin : {0.1, 0.3}) {
        const std::size_t plus = std::size_t(std::llround((1.0 + target_margin) / 2.0 * n));
        std::vector<Vote> votes;
        for (std::size_t i = 0; i < n; ++i) votes.push_back(i < plus ? vote_plus : vote_minus);
        const std::vector<AgentProfile> profiles(n, AgentProfile{0.75, 0.75});
        const double m = weighted_margin(votes, profiles);
        if (std::fabs(m - target_margin) > 1e-12) return {false, "margin construction failed"};
        for (const double beta : {0.05, 0.2}) {
            NoiseSpec noise;
            noise.mode = NoiseMode::site_dependent;
            noise.distribution = NoiseDistribution::gaussian_unit;
            noise.temperature = 1.0 / beta;
            noise.seed = 1009;
            std::size_t flips = 0;
            const std::size_t draws = 100000;
            for (std::uint64_t draw = 0; draw < draws; ++draw) {
                flips += decide_noisy(votes, profiles, noise, draw).vote == vote_minus;
            }
            const double observed = double(flips) / double(draws);
            const double expected = normal_cdf(-m / (beta * std::sqrt(double(n))));
            detail += (detail.empty() ? "" : ", ") + std::string("m=") + num(m) +
                      ",b=" + num(beta) + ": " + num(observed) + " vs " + num(expected);
            if (std::fabs(observed - expected) > 0.01) return {false, detail + " (off by > 0.01)"};
        }
    }
    return {true, detail};
}

Outcome consensus_beats_single_methods() {
    const int seeds = 20;
    double consensus_sum = 0.0, best_sum = 0.0;
    int beats_median = 0;
    for (int seed = 0; seed < seeds; ++seed) {
        const Dataset train_set =
            test_support::gaussian_task(200, 4, 1.5, rng::derive_seed(77, {std::uint64_t(seed), 0}));
        const Dataset test_set =
            test_support::gaussian_task(1000, 4, 1.5, rng::derive_seed(77, {std::uint64_t(seed), 1}));
        PipelineConfig config;  // identity + 2 random representations x 6 learners
        config.seed = rng::derive_seed(77, {std::uint64_t(seed), 2});
        const ModelBundle bundle = train_pipeline(train_set, config);
        const EvaluationReport report = evaluate_bundle(bundle, test_set);
        consensus_sum += report.consensus.accuracy;
        best_sum += report.best_agent_accuracy;
        beats_median += report.consensus.accuracy > report.median_agent_accuracy;
    }
    const double mean_consensus = consensus_sum / seeds;
    const double mean_best = best_sum / seeds;
    const std::string detail = "mean consensus " + num(mean_consensus) + ", mean best agent " +
                               num(mean_best) + ", beats median in " +
                               std::to_string(beats_median) + "/20 seeds";
    const bool pass = mean_consensus >= mean_best - 0.02 && beats_median >= 18;
    return {pass, detail};
}

Outcome calibration_correctness() {
    const Dataset balanced = test_support::random_dataset(100, 2, 8);
    const auto counts = pooled_out_of_fold_counts(balanced, 5, 4, [](const Dataset&) {
        return [](const Sample&) { return vote_plus; };
    });
    const AgentProfile constant = profile_from_counts(counts, 0.0);
    if (constant.recall != 1.0) return {false, "constant predictor recall != 1"};
    if (constant.precision < 0.45 || constant.precision > 0.55) {
        return {false, "constant predictor precision " + num(constant.precision)};
    }

    rng::Stream stream(6);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 100; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        rows.push_back({label * 10.0 + stream.next_symmetric()});
        labels.push_back(label);
    }
    const Dataset separated = make_dataset(std::move(rows), labels);
    LearnerSpec knn;
    knn.kind = LearnerKind::knn;
    knn.neighbors = 1;
    const AgentProfile perfect = estimate_profile(
        knn, fit_representation(separated, RepresentationSpec{}), separated, 5, 3, 1.0);
    if (perfect.precision < 0.95 || perfect.recall < 0.95) {
        return {false, "perfect learner calibrated to p=" + num(perfect.precision) +
                           ", s=" + num(perfect.recall)};
    }
    return {true,
            "constant: p=" + num(constant.precision) + " s=1.0; perfect: p=" +
                num(perfect.precision) + " s=" + num(perfect.recall)};
}

Outcome transition_recovery() {
    std::vector<double> xs, accs;
    for (double x = 0.0; x <= 4.0 + 1e-9; x += 0.25) {
        xs.push_back(x);
        accs.push_back(1.0 / (1.0 + std::exp(-(x - 2.0) / 0.1)));
    }
    const TransitionEstimate estimate = detect_transition(xs, accs);
    if (!estimate.found) return {false, "no transition found"};
    const bool pass = std::fabs(estimate.critical_value - 2.0) <= 0.25;
    return {pass, "critical value " + num(estimate.critical_value)};
}

Outcome determinism_and_persistence() {
    test_support::TempDir dir("acceptance");
    std::string csv = "x1,x2,x3,label\n";
    rng::Stream stream(5150);
    for (int i = 0; i < 60; ++i) {
        const int label = i % 2 == 0 ? 1 : -1;
        csv += format_double(label * 1.2 + stream.next_gaussian()) + "," +
               format_double(label * 1.2 + stream.next_gaussian()) + "," +
               format_double(stream.next_gaussian()) + "," + (label > 0 ? "1" : "-1") + "\n";
    }
    test_support::write_text(dir.file("train.csv"), csv);
    std::string queries = "x1,x2,x3\n";
    for (int i = 0; i < 50; ++i) {
        queries += format_double(stream.next_gaussian()) + "," +
                   format_double(stream.next_gaussian()) + "," +
                   format_double(stream.next_gaussian()) + "\n";
    }
    test_support::write_text(dir.file("q.csv"), queries);

    const auto cli = [&](std::vector<std::string> args) {
        args.insert(args.begin(), "brainstorm");
        std::ostringstream out, err;
        const int code = cli::run_cli(args, out, err);
        if (code != 0) throw DataError("cli exited " + std::to_string(code) + ": " + err.str());
        return out.str();
    };

    cli({"train", "--data", dir.file("train.csv").string(), "--out",
         dir.file("a.bundle").string(), "--seed", "99", "--folds", "4"});
    cli({"train", "--data", dir.file("train.csv").string(), "--out",
         dir.file("b.bundle").string(), "--seed", "99", "--folds", "4"});
    if (test_support::read_text(dir.file("a.bundle")) !=
        test_support::read_text(dir.file("b.bundle"))) {
        return {false, "bundles differ across identical runs"};
    }
    const std::string p1 = cli({"predict", "--model", dir.file("a.bundle").string(), "--data",
                                dir.file("q.csv").string()});
    const std::string p2 = cli({"predict", "--model", dir.file("b.bundle").string(), "--data",
                                dir.file("q.csv").string()});
    if (p1 != p2) return {false, "prediction CSVs differ across identical runs"};

    const ModelBundle bundle = load_bundle(dir.file("a.bundle"));
    std::vector<Sample> random_queries;
    for (int i = 0; i < 100; ++i) {
        Sample q;
        q.features = {stream.next_gaussian(), stream.next_gaussian(), stream.next_gaussian()};
        random_queries.push_back(std::move(q));
    }
    test_support::TempDir dir2("acceptance_rt");
    save_bundle(bundle, dir2.file("rt.bundle"));
    const ModelBundle reloaded = load_bundle(dir2.file("rt.bundle"));
    const auto a = predict_bundle(bundle, random_queries);
    const auto b = predict_bundle(reloaded, random_queries);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].votes != b[i].votes || a[i].margin != b[i].margin ||
            !(a[i].decision == b[i].decision) || a[i].reliability != b[i].reliability ||
            a[i].tie != b[i].tie) {
            return {false, "round-trip predictions differ at query " + std::to_string(i)};
        }
    }
    return {true, "byte-identical CSVs; bit-exact round-trip on 100 queries"};
}

}  // namespace

int main() {
    criterion(1, "equation hand values agree to 1e-12", 1.0, equation_hand_values);
    criterion(2, "margin bound and symmetries over 10^4 ensembles", 10.0,
              margin_bound_and_symmetries);
    criterion(3, "noisy decision equals noiseless at beta ~ 0", 10.0, noiseless_limit);
    criterion(4, "Monte Carlo matches the binomial oracle", 60.0, monte_carlo_vs_closed_form);
    criterion(5, "site-noise flip rate matches the normal CDF", 30.0, noise_flip_rate_oracle);
    criterion(6, "consensus reaches the level of the best single method", 300.0,
              consensus_beats_single_methods);
    criterion(7, "calibration recovers known profiles", 10.0, calibration_correctness);
    criterion(8, "transition detector recovers a logistic midpoint", 5.0, transition_recovery);
    criterion(9, "determinism and persistence are exact", 60.0, determinism_and_persistence);

    if (failures > 0) {
        std::printf("%d criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
