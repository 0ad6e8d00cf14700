#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "truthgrid/aggregators.hpp"
#include "truthgrid/agreement.hpp"
#include "truthgrid/harness.hpp"
#include "truthgrid/io.hpp"
#include "truthgrid/matrix.hpp"
#include "truthgrid/rng.hpp"
#include "truthgrid/simulator.hpp"

namespace fs = std::filesystem;
namespace tg = truthgrid;
using nlohmann::json;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string token;
    std::stringstream ss(s);
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) out.push_back(token);
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& flag) {
    std::vector<int> out;
    for (const auto& token : split_list(s)) {
        try {
            size_t used = 0;
            const int v = std::stoi(token, &used);
            if (used != token.size()) throw std::invalid_argument(token);
            out.push_back(v);
        } catch (const std::exception&) {
            throw CLI::ValidationError(flag, "'" + token + "' is not an integer");
        }
    }
    if (out.empty()) throw CLI::ValidationError(flag, "empty list");
    return out;
}

std::vector<tg::Method> parse_method_list(const std::string& s) {
    std::vector<tg::Method> out;
    for (const auto& token : split_list(s)) {
        try {
            out.push_back(tg::parse_method(token));
        } catch (const tg::Error& e) {
            throw CLI::ValidationError("--methods", e.what());
        }
    }
    if (out.empty()) throw CLI::ValidationError("--methods", "empty list");
    return out;
}

double parse_real(const std::string& token, const std::string& flag) {
    try {
        size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "'" + token + "' is not a number");
    }
}

// "16:0.66,6:0.88" -> {(16, 0.66), (6, 0.88)}
std::vector<std::pair<uint32_t, double>> parse_worker_groups(const std::string& s) {
    std::vector<std::pair<uint32_t, double>> groups;
    for (const auto& token : split_list(s)) {
        const size_t colon = token.find(':');
        if (colon == std::string::npos) {
            throw CLI::ValidationError("--workers", "expected COUNT:ACCURACY, got '" + token + "'");
        }
        const auto counts = parse_int_list(token.substr(0, colon), "--workers");
        if (counts.size() != 1 || counts[0] < 0) {
            throw CLI::ValidationError("--workers", "bad count in '" + token + "'");
        }
        groups.emplace_back(static_cast<uint32_t>(counts[0]),
                            parse_real(token.substr(colon + 1), "--workers"));
    }
    if (groups.empty()) throw CLI::ValidationError("--workers", "empty list");
    return groups;
}

std::string padded_id(char prefix, uint32_t index, size_t width) {
    std::string digits = std::to_string(index);
    std::string out(1, prefix);
    out.append(width > digits.size() ? width - digits.size() : 0, '0');
    out += digits;
    return out;
}

// One "# key=value ..." line carried at the top of every output file; the
// line holds everything needed to reproduce the run.
class ConfigEcho {
public:
    void add(std::string key, std::string value) { kv_.emplace_back(std::move(key), std::move(value)); }
    void add(std::string key, uint64_t v) { add(std::move(key), std::to_string(v)); }
    void add(std::string key, int v) { add(std::move(key), std::to_string(v)); }
    void add(std::string key, double v) { add(std::move(key), tg::format_double(v)); }

    std::string line() const {
        std::string out = "#";
        for (const auto& [k, v] : kv_) {
            out += ' ';
            out += k;
            out += '=';
            out += v;
        }
        out += '\n';
        return out;
    }

    json to_json() const {
        json j = json::object();
        for (const auto& [k, v] : kv_) j[k] = v;
        return j;
    }

private:
    std::vector<std::pair<std::string, std::string>> kv_;
};

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw tg::Error("cannot write '" + path.string() + "'");
    return f;
}

struct MethodParams {
    uint64_t seed = 0;
    double band = 0.05;
    double tol = 1e-6;
    double smoothing = 0.01;
    int min_overlap = 10;
    int iterations = 0;
    CLI::Option* iterations_opt = nullptr;

    void add_flags(CLI::App* cmd, double band_default) {
        band = band_default;
        cmd->add_option("--seed", seed, "RNG seed (env TRUTHGRID_SEED)")
            ->envname("TRUTHGRID_SEED")
            ->capture_default_str();
        cmd->add_option("--band", band, "Ambiguity half-width around the 0.5 score boundary")
            ->capture_default_str();
        cmd->add_option("--tol", tol, "Convergence tolerance (message passing and EM)")
            ->capture_default_str();
        cmd->add_option("--smoothing", smoothing, "EM pseudo-counts per confusion cell")
            ->capture_default_str();
        cmd->add_option("--min-overlap", min_overlap,
                        "Shared items required before a kappa pair counts")
            ->capture_default_str();
        iterations_opt = cmd->add_option(
            "--iterations", iterations,
            "Iteration cap for message passing and EM (defaults: 10 / 100)");
    }

    tg::AggregatorConfig config() const {
        tg::AggregatorConfig cfg;
        cfg.band.ambig_halfwidth = band;
        cfg.seed = seed;
        cfg.karger_epsilon = tol;
        cfg.em_tol = tol;
        cfg.em_smoothing = smoothing;
        cfg.min_overlap = min_overlap;
        if (iterations_opt->count() > 0) {
            if (iterations < 1) {
                throw CLI::ValidationError("--iterations", "must be at least 1");
            }
            cfg.karger_iterations = iterations;
            cfg.em_max_iter = iterations;
        }
        return cfg;
    }

    void echo_into(ConfigEcho& echo) const {
        echo.add("seed", seed);
        echo.add("band", band);
        echo.add("tol", tol);
        echo.add("smoothing", smoothing);
        echo.add("min-overlap", min_overlap);
        if (iterations_opt->count() > 0) echo.add("iterations", iterations);
    }
};

json diagnostics_json(const tg::MethodResult& r) {
    json j;
    int ambig = 0;
    for (const auto l : r.item_labels) {
        if (l == tg::Category::Ambig) ++ambig;
    }
    j["ambig_count"] = ambig;
    j["iterations"] = r.diagnostics.iterations;
    j["converged"] = r.diagnostics.converged;
    j["final_delta"] = r.diagnostics.final_delta;
    j["log_likelihood"] = r.diagnostics.log_likelihood;  // NaN serializes as null
    j["degenerate_fallback"] = r.diagnostics.degenerate_fallback;
    j["zero_information_items"] = r.diagnostics.zero_information_items.size();
    return j;
}

void cmd_aggregate(const std::string& in, const std::string& out_dir,
                   const std::string& methods_csv, const MethodParams& params) {
    const std::vector<tg::Method> methods = parse_method_list(methods_csv);
    const tg::AggregatorConfig cfg = params.config();
    const tg::AnnotationMatrix m = tg::load_annotations_file(in);

    ConfigEcho echo;
    echo.add("command", "aggregate");
    echo.add("in", in);
    echo.add("methods", methods_csv);
    params.echo_into(echo);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);

    std::vector<tg::MethodResult> results;
    std::optional<tg::KappaWeightMap> weights;
    std::optional<tg::ConfusionModel> model;
    for (const tg::Method method : methods) {
        if (method == tg::Method::Kappa) {
            weights = tg::pairwise_kappa_weights(m, cfg.min_overlap);
            results.push_back(tg::kappa_weighted_vote(m, *weights, cfg.band));
        } else if (method == tg::Method::DawidSkene) {
            tg::DawidSkeneRun run =
                tg::dawid_skene_em(m, cfg.em_max_iter, cfg.em_tol, cfg.em_smoothing, cfg.band);
            model = std::move(run.model);
            results.push_back(std::move(run.result));
        } else {
            results.push_back(tg::run_method(m, method, cfg));
        }
        const tg::MethodResult& r = results.back();
        auto items_csv = open_out(out / (r.method_name + "_items.csv"));
        items_csv << echo.line();
        tg::write_method_items_csv(m, r, items_csv);
        auto annotators_csv = open_out(out / (r.method_name + "_annotators.csv"));
        annotators_csv << echo.line();
        tg::write_method_annotators_csv(m, r, annotators_csv);
    }

    if (weights) {
        auto f = open_out(out / "kappa_weights.csv");
        f << echo.line();
        tg::write_kappa_weights_csv(m, *weights, f);
    }
    if (model) {
        json j;
        j["config"] = echo.to_json();
        j["class_priors"] = model->class_priors;
        json rates = json::object();
        for (uint32_t a = 0; a < m.annotator_count(); ++a) {
            rates[m.annotator_id(a)] = model->error_rates[a];
        }
        j["error_rates"] = rates;
        json post = json::object();
        for (uint32_t i = 0; i < m.item_count(); ++i) {
            post[m.item_id(i)] = model->posterior_sarc[i];
        }
        j["posterior_sarc"] = post;
        auto f = open_out(out / "dawid_skene_model.json");
        f << j.dump(2) << '\n';
    }

    std::set<std::string> distinct;
    for (const auto& r : results) distinct.insert(r.method_name);
    std::optional<int> consensus_ambig;
    if (results.size() == 4 && distinct.size() == 4) {
        std::vector<const tg::MethodResult*> ptrs;
        for (const auto& r : results) ptrs.push_back(&r);
        const tg::ConsensusResult consensus = tg::method_consensus(ptrs);
        auto f = open_out(out / "consensus.csv");
        f << echo.line() << "item_id,sarc_method_count,consensus\n";
        consensus_ambig = 0;
        for (uint32_t i = 0; i < m.item_count(); ++i) {
            f << m.item_id(i) << ',' << consensus.sarc_method_count[i] << ','
              << tg::category_name(consensus.consensus[i]) << '\n';
            if (consensus.consensus[i] == tg::Category::Ambig) ++(*consensus_ambig);
        }
    }

    json summary;
    summary["config"] = echo.to_json();
    summary["items"] = m.item_count();
    summary["annotators"] = m.annotator_count();
    summary["judgments"] = m.judgment_count();
    try {
        summary["alpha"] = tg::krippendorff_alpha(m);
    } catch (const tg::Error&) {
        summary["alpha"] = nullptr;  // undefined on this matrix
    }
    const tg::ValidationReport v = tg::validate_matrix(m);
    summary["validation"] = {{"low_judgment_items", v.low_judgment_items.size()},
                             {"low_judgment_annotators", v.low_judgment_annotators.size()},
                             {"connected_components", v.connected_components}};
    json per_method = json::object();
    for (const auto& r : results) per_method[r.method_name] = diagnostics_json(r);
    summary["methods"] = per_method;
    if (consensus_ambig) summary["consensus_ambig_count"] = *consensus_ambig;
    auto f = open_out(out / "summary.json");
    f << summary.dump(2) << '\n';
}

void cmd_simulate(const std::string& workers_csv, int items, int per_item, int max_per_item,
                  int hit_size, const std::string& ambiguous_spec, const std::string& out_dir,
                  uint64_t seed) {
    if (items < 1) throw CLI::ValidationError("--items", "must be at least 1");
    if (per_item < 1) throw CLI::ValidationError("--per-item", "must be at least 1");
    if (hit_size < 1) throw CLI::ValidationError("--hit-size", "must be at least 1");
    const auto groups = parse_worker_groups(workers_csv);

    ConfigEcho echo;
    echo.add("command", "simulate");
    echo.add("workers", workers_csv);
    echo.add("items", items);
    echo.add("per-item", per_item);
    if (max_per_item > 0) echo.add("max-per-item", max_per_item);
    echo.add("hit-size", hit_size);
    if (!ambiguous_spec.empty()) echo.add("ambiguous", ambiguous_spec);
    echo.add("seed", seed);

    const auto population = tg::generate_population(groups);
    const size_t width = std::max<size_t>(3, std::to_string(items - 1).size());
    std::vector<std::string> item_ids;
    item_ids.reserve(static_cast<size_t>(items));
    for (int i = 0; i < items; ++i) {
        item_ids.push_back(padded_id('i', static_cast<uint32_t>(i), width));
    }

    tg::GoldStandard truth;
    for (const auto& id : item_ids) {
        tg::Rng rng(tg::seed_mix(seed, std::string_view("truth"), std::string_view(id)));
        truth.truth.emplace(id, rng.bernoulli(0.5) ? tg::Label::Sarc : tg::Label::NotSarc);
    }

    std::map<std::string, double> ambiguous;
    if (!ambiguous_spec.empty()) {
        const size_t colon = ambiguous_spec.find(':');
        if (colon == std::string::npos) {
            throw CLI::ValidationError("--ambiguous", "expected COUNT:PROBABILITY");
        }
        const auto counts = parse_int_list(ambiguous_spec.substr(0, colon), "--ambiguous");
        const double q = parse_real(ambiguous_spec.substr(colon + 1), "--ambiguous");
        if (counts.size() != 1 || counts[0] < 0 || counts[0] > items) {
            throw CLI::ValidationError("--ambiguous", "count exceeds the item count");
        }
        // The trailing items of the corpus form the ambiguous pool.
        for (int i = items - counts[0]; i < items; ++i) {
            ambiguous.emplace(item_ids[static_cast<size_t>(i)], q);
        }
    }

    const tg::AssignmentGraph graph = tg::generate_assignment(
        static_cast<uint32_t>(population.size()), item_ids, static_cast<uint32_t>(hit_size),
        static_cast<uint32_t>(per_item), std::nullopt, seed,
        max_per_item > 0 ? static_cast<uint32_t>(max_per_item) : 0);
    const tg::AnnotationMatrix m =
        tg::simulate_annotations(population, graph, truth, seed, ambiguous);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    auto annotations = open_out(out / "annotations.csv");
    annotations << echo.line();
    tg::write_annotations(m, annotations);
    auto gold = open_out(out / "gold.csv");
    gold << echo.line();
    tg::write_gold(truth, gold);
}

void cmd_sweep(const std::string& in, const std::string& gold_path, const std::string& out_dir,
               const std::string& methods_csv, const std::string& ks_csv, int replicates,
               const MethodParams& params) {
    const std::vector<tg::Method> methods = parse_method_list(methods_csv);
    const std::vector<int> ks = parse_int_list(ks_csv, "--ks");
    const tg::AggregatorConfig cfg = params.config();
    const tg::AnnotationMatrix m = tg::load_annotations_file(in);
    const tg::GoldStandard gold = tg::load_gold_file(gold_path);

    ConfigEcho echo;
    echo.add("command", "sweep");
    echo.add("in", in);
    echo.add("gold", gold_path);
    echo.add("methods", methods_csv);
    echo.add("ks", ks_csv);
    echo.add("replicates", replicates);
    params.echo_into(echo);

    const tg::SweepCurve curve =
        tg::subsample_sweep(m, gold, ks, replicates, methods, params.seed, cfg);
    fs::create_directories(out_dir);
    auto f = open_out(fs::path(out_dir) / "sweep.csv");
    f << echo.line();
    curve.write_csv(f);
}

void cmd_switches(const std::string& in, const std::string& out_dir,
                  const std::string& method_name, const std::string& starts_csv, int end_n,
                  int trajectories, int traj_step, const MethodParams& params) {
    const std::vector<int> starts = parse_int_list(starts_csv, "--start");
    if (trajectories > 0 && starts.size() != 1) {
        throw CLI::ValidationError("--trajectories", "needs exactly one --start value");
    }
    tg::Method method;
    try {
        method = tg::parse_method(method_name);
    } catch (const tg::Error& e) {
        throw CLI::ValidationError("--method", e.what());
    }
    const tg::AggregatorConfig cfg = params.config();
    const tg::AnnotationMatrix m = tg::load_annotations_file(in);

    ConfigEcho echo;
    echo.add("command", "switches");
    echo.add("in", in);
    echo.add("method", method_name);
    echo.add("start", starts_csv);
    echo.add("end", end_n);
    if (trajectories > 0) {
        echo.add("trajectories", trajectories);
        echo.add("traj-step", traj_step);
    }
    params.echo_into(echo);

    std::vector<tg::SwitchRow> rows;
    std::vector<tg::TrajectoryPoint> points;
    for (const int start : starts) {
        tg::SwitchReport report = tg::track_label_switches(m, start, end_n, method, params.seed,
                                                           cfg, trajectories, traj_step);
        rows.push_back(report.row);
        if (trajectories > 0) points = std::move(report.trajectories);
    }
    fs::create_directories(out_dir);
    auto f = open_out(fs::path(out_dir) / "switches.csv");
    f << echo.line();
    tg::write_switch_csv(rows, f);
    if (trajectories > 0) {
        auto t = open_out(fs::path(out_dir) / "trajectories.csv");
        t << echo.line();
        tg::write_trajectories_csv(points, t);
    }
}

std::vector<std::pair<std::string, double>> load_scores(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw tg::Error("cannot open score file: " + path);
    std::vector<std::pair<std::string, double>> scores;
    std::set<std::string> seen;
    std::string line;
    size_t lineno = 0;
    bool header_done = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const size_t c1 = line.find(',');
        if (c1 == std::string::npos) {
            throw tg::ParseError("line " + std::to_string(lineno) +
                                 ": expected item_id,score[,...]");
        }
        const size_t c2 = line.find(',', c1 + 1);
        const std::string id = line.substr(0, c1);
        const std::string score_field =
            c2 == std::string::npos ? line.substr(c1 + 1) : line.substr(c1 + 1, c2 - c1 - 1);
        if (!header_done) {
            if (id != "item_id" || score_field != "score") {
                throw tg::ParseError("line " + std::to_string(lineno) +
                                     ": expected header starting with item_id,score");
            }
            header_done = true;
            continue;
        }
        if (id.empty()) {
            throw tg::ParseError("line " + std::to_string(lineno) + ": empty item_id");
        }
        if (!seen.insert(id).second) {
            throw tg::ConflictError("duplicate score row for item '" + id + "'");
        }
        try {
            size_t used = 0;
            const double v = std::stod(score_field, &used);
            if (used != score_field.size()) throw std::invalid_argument(score_field);
            scores.emplace_back(id, v);
        } catch (const std::exception&) {
            throw tg::ParseError("line " + std::to_string(lineno) + ": bad score '" +
                                 score_field + "'");
        }
    }
    if (!header_done) throw tg::ParseError("empty score file: " + path);
    return scores;
}

void cmd_select(const std::string& in, const std::string& out_dir, int n_sarc, int n_notsarc,
                int n_above, int n_below, uint64_t seed) {
    if (n_sarc < 0 || n_notsarc < 0 || n_above < 0 || n_below < 0) {
        throw CLI::ValidationError("--sarc", "band sizes cannot be negative");
    }
    const auto scores = load_scores(in);
    const tg::BandSelection sel = tg::select_by_score_bands(
        scores, static_cast<size_t>(n_sarc), static_cast<size_t>(n_notsarc),
        static_cast<size_t>(n_above), static_cast<size_t>(n_below));

    std::map<std::string, double> by_id(scores.begin(), scores.end());
    ConfigEcho echo;
    echo.add("command", "select");
    echo.add("in", in);
    echo.add("sarc", n_sarc);
    echo.add("notsarc", n_notsarc);
    echo.add("ambig-above", n_above);
    echo.add("ambig-below", n_below);
    echo.add("seed", seed);

    fs::create_directories(out_dir);
    auto f = open_out(fs::path(out_dir) / "selection.csv");
    f << echo.line();
    f << "# pivot_id=" << sel.pivot_id << " pivot_score=" << tg::format_double(sel.pivot_score)
      << " ambig_min_score=" << tg::format_double(sel.ambig_min_score)
      << " ambig_max_score=" << tg::format_double(sel.ambig_max_score) << '\n';
    f << "item_id,score,band\n";
    const auto emit = [&](const std::vector<std::string>& ids, const char* band) {
        for (const auto& id : ids) {
            f << id << ',' << tg::format_double(by_id.at(id)) << ',' << band << '\n';
        }
    };
    emit(sel.notsarc, "NOT-SARC");
    emit(sel.ambig_below, "AMBIG-BELOW");
    emit(sel.ambig_above, "AMBIG-ABOVE");
    emit(sel.sarc, "SARC");
}

// Config files are expanded into flag tokens ahead of the user's own flags;
// TakeLast then makes explicit flags win over config values.
void configure_subcommand(CLI::App* cmd) {
    cmd->add_option("--config", "key=value file mirroring the flags; flags take precedence");
    for (CLI::Option* opt : cmd->get_options()) {
        if (opt->get_name() != "--help") opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    }
}

struct UsageError {
    std::string message;
};

std::string trimmed(const std::string& s) {
    const size_t from = s.find_first_not_of(" \t\r");
    if (from == std::string::npos) return "";
    const size_t to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
}

// Rewrites "cmd --config FILE ..." into "cmd --key value ... --config FILE ..."
// so the regular parser applies config values with lower precedence.
std::vector<std::string> expand_config_file(std::vector<std::string> args) {
    if (args.empty() || args[0].empty() || args[0][0] == '-') return args;
    std::string path;
    for (size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[i + 1];
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
            break;
        }
    }
    if (path.empty()) return args;

    std::ifstream f(path);
    if (!f) throw UsageError{"cannot read config file '" + path + "'"};
    std::vector<std::string> tokens;
    std::string line;
    size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        line = trimmed(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError{"config file '" + path + "' line " + std::to_string(line_no) +
                             ": expected key=value"};
        }
        const std::string key = trimmed(line.substr(0, eq));
        std::string value = trimmed(line.substr(eq + 1));
        if (key.empty()) {
            throw UsageError{"config file '" + path + "' line " + std::to_string(line_no) +
                             ": empty key"};
        }
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        tokens.push_back("--" + key);
        tokens.push_back(value);
    }
    args.insert(args.begin() + 1, tokens.begin(), tokens.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Truth inference toolkit for binary crowd annotations"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic annotation matrix with gold");
    std::string sim_workers, sim_ambiguous, sim_out = ".";
    int sim_items = 0, sim_per_item = 0, sim_max_per_item = 0, sim_hit_size = 10;
    uint64_t sim_seed = 0;
    sim->add_option("--workers", sim_workers, "Population groups COUNT:ACCURACY[,COUNT:ACCURACY...]")
        ->required();
    sim->add_option("--items", sim_items, "Number of items")->required();
    sim->add_option("--per-item", sim_per_item, "Judgments per item")->required();
    sim->add_option("--max-per-item", sim_max_per_item,
                    "Upper bound for a per-HIT judgment count draw");
    sim->add_option("--hit-size", sim_hit_size, "Items per HIT")->capture_default_str();
    sim->add_option("--ambiguous", sim_ambiguous,
                    "COUNT:PROBABILITY trailing items whose judgments ignore worker quality");
    sim->add_option("--out", sim_out, "Output directory")->capture_default_str();
    sim->add_option("--seed", sim_seed, "RNG seed (env TRUTHGRID_SEED)")
        ->envname("TRUTHGRID_SEED")
        ->capture_default_str();
    configure_subcommand(sim);
    sim->callback([&] {
        cmd_simulate(sim_workers, sim_items, sim_per_item, sim_max_per_item, sim_hit_size,
                     sim_ambiguous, sim_out, sim_seed);
    });

    // aggregate
    auto* agg = app.add_subcommand("aggregate", "Run inference methods over an annotation CSV");
    std::string agg_in, agg_out = ".", agg_methods = "majority,kappa,karger,em";
    MethodParams agg_params;
    agg->add_option("--in", agg_in, "Annotation CSV")->required();
    agg->add_option("--out", agg_out, "Output directory")->capture_default_str();
    agg->add_option("--methods", agg_methods, "Comma list: majority,kappa,karger,em")
        ->capture_default_str();
    agg_params.add_flags(agg, 0.05);
    configure_subcommand(agg);
    agg->callback([&] { cmd_aggregate(agg_in, agg_out, agg_methods, agg_params); });

    // sweep
    auto* swp = app.add_subcommand("sweep", "Accuracy vs judgments-per-item subsampling sweep");
    std::string swp_in, swp_gold, swp_out = ".", swp_methods = "majority,kappa,karger,em";
    std::string swp_ks = "3,5,7,9,11,13,15,17,19,21,23";
    int swp_replicates = 10;
    MethodParams swp_params;
    swp->add_option("--in", swp_in, "Annotation CSV")->required();
    swp->add_option("--gold", swp_gold, "Gold CSV")->required();
    swp->add_option("--out", swp_out, "Output directory")->capture_default_str();
    swp->add_option("--methods", swp_methods, "Comma list: majority,kappa,karger,em")
        ->capture_default_str();
    swp->add_option("--ks", swp_ks, "Comma list of subset sizes")->capture_default_str();
    swp->add_option("--replicates", swp_replicates, "Replicates per subset size")
        ->capture_default_str();
    swp_params.add_flags(swp, 0.0);
    configure_subcommand(swp);
    swp->callback([&] {
        cmd_sweep(swp_in, swp_gold, swp_out, swp_methods, swp_ks, swp_replicates, swp_params);
    });

    // switches
    auto* sw = app.add_subcommand("switches", "Label switches between small and large samples");
    std::string sw_in, sw_out = ".", sw_method = "majority", sw_start = "3";
    int sw_end = 23, sw_traj = 0, sw_traj_step = 2;
    MethodParams sw_params;
    sw->add_option("--in", sw_in, "Annotation CSV")->required();
    sw->add_option("--out", sw_out, "Output directory")->capture_default_str();
    sw->add_option("--method", sw_method, "One of majority,kappa,karger,em")
        ->capture_default_str();
    sw->add_option("--start", sw_start, "Comma list of starting judgment counts")
        ->capture_default_str();
    sw->add_option("--end", sw_end, "Final judgment count")->capture_default_str();
    sw->add_option("--trajectories", sw_traj,
                   "Half-window of most-ambiguous items to trace over the n grid");
    sw->add_option("--traj-step", sw_traj_step, "Grid step for trajectories")
        ->capture_default_str();
    sw_params.add_flags(sw, 0.0);
    configure_subcommand(sw);
    sw->callback([&] {
        cmd_switches(sw_in, sw_out, sw_method, sw_start, sw_end, sw_traj, sw_traj_step,
                     sw_params);
    });

    // select
    auto* sel = app.add_subcommand("select", "Cut score-sorted items into labeled bands");
    std::string sel_in, sel_out = ".";
    int sel_sarc = 0, sel_notsarc = 0, sel_above = 0, sel_below = 0;
    uint64_t sel_seed = 0;
    sel->add_option("--in", sel_in, "Score CSV (item_id,score[,...])")->required();
    sel->add_option("--out", sel_out, "Output directory")->capture_default_str();
    sel->add_option("--sarc", sel_sarc, "Top-score band size")->required();
    sel->add_option("--notsarc", sel_notsarc, "Bottom-score band size")->required();
    sel->add_option("--ambig-above", sel_above, "Ambiguous items above the pivot")->required();
    sel->add_option("--ambig-below", sel_below, "Ambiguous items ending at the pivot")
        ->required();
    sel->add_option("--seed", sel_seed, "RNG seed (env TRUTHGRID_SEED)")
        ->envname("TRUTHGRID_SEED")
        ->capture_default_str();
    configure_subcommand(sel);
    sel->callback([&] {
        cmd_select(sel_in, sel_out, sel_sarc, sel_notsarc, sel_above, sel_below, sel_seed);
    });

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = expand_config_file(std::move(args));
        std::reverse(args.begin(), args.end());  // CLI11 takes the vector reversed
        app.parse(args);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.message << '\n';
        return 1;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    } catch (const tg::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
