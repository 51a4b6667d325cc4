#pragma once

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "brainstorm/bundle_io.hpp"
#include "brainstorm/csv.hpp"
#include "brainstorm/pipeline.hpp"
#include "brainstorm/simulator.hpp"

namespace brainstorm::cli {

namespace detail {

inline NoiseMode noise_mode_from_flag(const std::string& value) {
    if (value == "none") return NoiseMode::none;
    if (value == "site" || value == "site_dependent") return NoiseMode::site_dependent;
    if (value == "global" || value == "uniform_global") return NoiseMode::uniform_global;
    throw DataError("unknown noise mode '" + value + "' (expected none, site or global)");
}

inline NoiseDistribution noise_distribution_from_flag(const std::string& value) {
    if (value == "gaussian" || value == "gaussian_unit") return NoiseDistribution::gaussian_unit;
    if (value == "uniform" || value == "uniform_pm1") return NoiseDistribution::uniform_pm1;
    throw DataError("unknown noise distribution '" + value + "'");
}

inline PopulationSpec population_from_flag(const std::string& value) {
    const auto colon = value.find(':');
    if (colon == std::string::npos) {
        throw DataError("population must look like kind:a,b (e.g. point:0.7,0.7)");
    }
    const std::string kind = value.substr(0, colon);
    const std::string params = value.substr(colon + 1);
    const auto comma = params.find(',');
    if (comma == std::string::npos) {
        throw DataError("population needs two parameters, got '" + params + "'");
    }
    PopulationSpec spec;
    if (kind == "point" || kind == "point_mass") {
        spec.kind = PopulationKind::point_mass;
    } else if (kind == "uniform" || kind == "independent_uniform") {
        spec.kind = PopulationKind::independent_uniform;
    } else if (kind == "equal" || kind == "correlated_equal") {
        spec.kind = PopulationKind::correlated_equal;
    } else {
        throw DataError("unknown population kind '" + kind + "'");
    }
    try {
        spec.a = std::stod(params.substr(0, comma));
        spec.b = std::stod(params.substr(comma + 1));
    } catch (const std::exception&) {
        throw DataError("population parameters '" + params + "' are not numeric");
    }
    spec.validate();
    return spec;
}

inline std::vector<LearnerSpec> roster_from_names(const std::vector<std::string>& names) {
    std::vector<LearnerSpec> roster;
    for (const std::string& name : names) {
        LearnerSpec spec;
        spec.kind = learner_kind_from_name(name);
        roster.push_back(spec);
    }
    return roster;
}

inline void write_or_print(const std::optional<std::string>& out_path,
                           const std::string& content, std::ostream& out) {
    if (out_path) {
        write_file_atomic(*out_path, content);
    } else {
        out << content;
    }
}

}  // namespace detail

// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
// Diagnostics go to the error stream, data to the output stream.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"brainstorm: consensus ensemble training, prediction and simulation"};
    app.require_subcommand(1);

    // shared option storage
    std::string data_path, model_path;
    std::optional<std::string> out_path;
    std::optional<std::string> label_column;
    std::uint64_t seed = 0;

    auto* train_cmd = app.add_subcommand("train", "Train a consensus model from a labeled CSV");
    std::size_t folds = 5, reps = 3;
    std::vector<std::string> learner_names;
    double smoothing = 1.0;
    bool force_ps_equal = false, average_per_kind = false;
    std::string train_noise = "none", train_distribution = "gaussian";
    std::string noise_scaling = "inverse_temperature";
    double train_temperature = 1.0;
    train_cmd->add_option("--data", data_path, "Training CSV")->required();
    train_cmd->add_option("--out", out_path, "Bundle output path")->required();
    train_cmd->add_option("--seed", seed, "Master seed");
    train_cmd->add_option("--folds", folds, "Calibration folds");
    train_cmd->add_option("--reps", reps, "Representation count (identity is always first)");
    train_cmd->add_option("--learners", learner_names, "Comma-separated learner kinds")
        ->delimiter(',');
    train_cmd->add_option("--alpha", smoothing, "Profile smoothing");
    train_cmd->add_flag("--force-ps-equal", force_ps_equal,
                        "Force each agent's recall equal to its precision");
    train_cmd->add_flag("--avg-per-kind", average_per_kind,
                        "Average profiles across representations per learner kind");
    train_cmd->add_option("--noise", train_noise, "Noise mode: none, site or global");
    train_cmd->add_option("--temperature", train_temperature, "Noise temperature");
    train_cmd->add_option("--noise-distribution", train_distribution,
                          "Noise distribution: gaussian or uniform");
    train_cmd->add_option("--noise-scaling", noise_scaling,
                          "inverse_temperature (default) or temperature");
    train_cmd->add_option("--label-column", label_column, "Label column name");

    auto* predict_cmd = app.add_subcommand("predict", "Predict a CSV of queries with a bundle");
    predict_cmd->add_option("--model", model_path, "Bundle path")->required();
    predict_cmd->add_option("--data", data_path, "Query CSV")->required();
    predict_cmd->add_option("--out", out_path, "Prediction CSV path (default: stdout)");
    predict_cmd->add_option("--label-column", label_column,
                            "Column to treat as label (excluded from features)");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a bundle on a labeled CSV");
    evaluate_cmd->add_option("--model", model_path, "Bundle path")->required();
    evaluate_cmd->add_option("--data", data_path, "Labeled test CSV")->required();
    evaluate_cmd->add_option("--out", out_path, "Report CSV path (default: stdout)");
    evaluate_cmd->add_option("--label-column", label_column, "Label column name");

    auto* simulate_cmd =
        app.add_subcommand("simulate", "Monte Carlo accuracy sweep over (N, temperature)");
    std::size_t trials = 10000;
    std::vector<std::size_t> agent_counts = {1, 3, 5, 7, 9, 11};
    std::vector<double> temperatures = {1.0};
    std::string sim_noise = "site", sim_distribution = "gaussian";
    std::string population_text = "point:0.7,0.7";
    simulate_cmd->add_option("--out", out_path, "Sweep CSV path (default: stdout)");
    simulate_cmd->add_option("--seed", seed, "Master seed");
    simulate_cmd->add_option("--trials", trials, "Trials per cell (>= 100)");
    simulate_cmd->add_option("--agents", agent_counts, "Odd ensemble sizes")->delimiter(',');
    simulate_cmd->add_option("--temperature", temperatures, "Temperatures")->delimiter(',');
    simulate_cmd->add_option("--noise", sim_noise, "Noise mode: none, site or global");
    simulate_cmd->add_option("--distribution", sim_distribution,
                             "Noise distribution: gaussian or uniform");
    simulate_cmd->add_option("--noise-scaling", noise_scaling,
                             "inverse_temperature (default) or temperature");
    simulate_cmd->add_option("--population", population_text,
                             "point:a,b | uniform:lo,hi | equal:lo,hi");

    auto* inspect_cmd = app.add_subcommand("inspect", "Show a bundle's agents and weights");
    std::size_t query_row = 0;
    inspect_cmd->add_option("--model", model_path, "Bundle path")->required();
    inspect_cmd->add_option("--data", data_path, "Optional query CSV for vote/impact details");
    inspect_cmd->add_option("--row", query_row, "Query row index (0-based)");
    inspect_cmd->add_option("--label-column", label_column, "Label column name in the query CSV");

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size());
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(train_cmd)) {
            CsvReadOptions read;
            read.label_column = label_column;
            const Dataset dataset = parse_dataset_csv(data_path, read);
            PipelineConfig config;
            config.seed = seed;
            config.folds = folds;
            config.representation_count = reps;
            if (!learner_names.empty()) config.roster = detail::roster_from_names(learner_names);
            config.smoothing = smoothing;
            config.force_recall_equals_precision = force_ps_equal;
            config.average_profiles_per_kind = average_per_kind;
            config.consensus.noise.mode = detail::noise_mode_from_flag(train_noise);
            config.consensus.noise.distribution =
                detail::noise_distribution_from_flag(train_distribution);
            config.consensus.noise.temperature = train_temperature;
            config.consensus.noise.scaling = noise_scaling_from_name(noise_scaling);
            config.consensus.noise.seed = rng::derive_seed(seed, {0x4015e});
            const ModelBundle bundle = train_pipeline(dataset, config);
            save_bundle(bundle, *out_path);
            err << "trained " << bundle.agents.size() << " agents ("
                << bundle.representations.size() << " representations x "
                << config.roster.size() << " learners); bundle written to " << *out_path
                << "\n";
            return 0;
        }

        if (app.got_subcommand(predict_cmd)) {
            const ModelBundle bundle = load_bundle(model_path);
            CsvReadOptions read;
            read.label_column = label_column;
            read.require_labels = false;
            const Dataset queries = parse_dataset_csv(data_path, read);
            const auto results = predict_bundle(bundle, queries.samples);
            detail::write_or_print(out_path, predictions_to_csv(results), out);
            return 0;
        }

        if (app.got_subcommand(evaluate_cmd)) {
            const ModelBundle bundle = load_bundle(model_path);
            CsvReadOptions read;
            read.label_column = label_column;
            const Dataset test = parse_dataset_csv(data_path, read);
            const EvaluationReport report = evaluate_bundle(bundle, test);
            detail::write_or_print(out_path, evaluation_to_csv(report), out);
            err << "consensus accuracy " << format_double(report.consensus.accuracy)
                << (report.consensus_at_least_best ? " >= " : " < ")
                << "best single agent " << format_double(report.best_agent_accuracy)
                << " (median agent " << format_double(report.median_agent_accuracy) << ")\n";
            return 0;
        }

        if (app.got_subcommand(simulate_cmd)) {
            NoiseSpec noise;
            noise.mode = detail::noise_mode_from_flag(sim_noise);
            noise.distribution = detail::noise_distribution_from_flag(sim_distribution);
            noise.scaling = noise_scaling_from_name(noise_scaling);
            const PopulationSpec population = detail::population_from_flag(population_text);
            const SweepGrid grid =
                run_sweep(population, agent_counts, noise, temperatures, trials, seed);
            detail::write_or_print(out_path, sweep_to_csv(grid), out);
            return 0;
        }

        if (app.got_subcommand(inspect_cmd)) {
            const ModelBundle bundle = load_bundle(model_path);
            const auto profiles = brainstorm::detail::bundle_profiles(bundle);
            const auto weights = consensus_weights(profiles);

            out << "bundle: " << bundle.agents.size() << " agents, "
                << bundle.representations.size() << " representations, dimensionality "
                << bundle.dimensionality << ", seed " << bundle.seed << "\n";
            out << "config digest: " << bundle.config_digest << "\n\n";
            out << std::left << std::setw(6) << "agent" << std::setw(24) << "name"
                << std::setw(12) << "precision" << std::setw(12) << "recall" << std::setw(12)
                << "weight" << "\n";
            out << std::fixed << std::setprecision(6);
            for (std::size_t a = 0; a < bundle.agents.size(); ++a) {
                out << std::left << std::setw(6) << a << std::setw(24) << bundle.agent_name(a)
                    << std::setw(12) << profiles[a].precision << std::setw(12)
                    << profiles[a].recall << std::setw(12) << weights[a] << "\n";
            }

            if (!data_path.empty()) {
                CsvReadOptions read;
                read.label_column = label_column;
                read.require_labels = false;
                const Dataset queries = parse_dataset_csv(data_path, read);
                if (query_row >= queries.size()) {
                    throw DataError("query row " + std::to_string(query_row) +
                                    " out of range (file has " + std::to_string(queries.size()) +
                                    " rows)");
                }
                const auto results =
                    predict_bundle(bundle, {&queries.samples[query_row], 1});
                const ConsensusResult& r = results.front();
                out << "\nquery row " << query_row << ":\n";
                out << std::left << std::setw(6) << "agent" << std::setw(24) << "name"
                    << std::setw(8) << "vote" << std::setw(14) << "impact" << "\n";
                for (std::size_t a = 0; a < bundle.agents.size(); ++a) {
                    const double impact =
                        learning_impact(a, r.votes, profiles, bundle.config.consensus);
                    out << std::left << std::setw(6) << a << std::setw(24)
                        << bundle.agent_name(a) << std::setw(8) << r.votes[a].value
                        << std::setw(14) << impact << "\n";
                }
                out << "margin " << format_double(r.margin) << ", decision " << r.decision.value
                    << ", reliability " << format_double(r.reliability) << ", tie "
                    << (r.tie ? "1" : "0") << "\n";
            }
            return 0;
        }

        err << "error: no command selected\n";
        return 1;
    } catch (const DataError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return 3;
    }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return run_cli(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace brainstorm::cli
