#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "tbc/errors.hpp"
#include "tbc/generators.hpp"
#include "tbc/gp.hpp"
#include "tbc/harness.hpp"
#include "tbc/qbc.hpp"
#include "tbc/spec_io.hpp"
#include "tbc/sut.hpp"

namespace tbc::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Settings {
    TbcConfig tbc{};
    ArtConfig art{};
    int runs = 30;
    double kill_tolerance = kDefaultKillTolerance;
    int timeout_ms = 5000;
    int jobs = 1;
    std::uint64_t seed = 0;
    int top_k = 10;
    std::string spec;
    std::string tests;
    std::string fixture;
};

// Flags as given on the command line; unset ones leave the resolved value alone.
struct Flags {
    std::optional<int> population, max_depth, tournament, generations, stagnation;
    std::optional<double> crossover, mutation, substitution, kill_tolerance;
    std::optional<int> iterations, per_iteration, pool, committee, candidates, runs, timeout, jobs, top_k;
    std::optional<std::uint64_t> seed;
    bool warm_start = false;
    bool normalize = false;
    std::string preset;
    std::string config;
    std::string spec, tests, fixture;
    std::string out = ".";
    bool log_timing = false;
};

json number(double x) {
    if (std::isfinite(x)) {
        return x;
    }
    return format_double(x);
}

json settings_json(const Settings& s) {
    json j;
    j["seed"] = s.seed;
    if (!s.spec.empty()) {
        j["spec"] = s.spec;
    }
    if (!s.tests.empty()) {
        j["tests"] = s.tests;
    }
    if (!s.fixture.empty()) {
        j["fixture"] = s.fixture;
    }
    j["iterations"] = s.tbc.iterations;
    j["testsPerIteration"] = s.tbc.tests_per_iteration;
    j["randomPoolSize"] = s.tbc.random_pool_size;
    j["committeeSize"] = s.tbc.committee_size;
    j["substitutionValue"] = s.tbc.substitution_value;
    j["warmStart"] = s.tbc.warm_start;
    const GpConfig& g = s.tbc.gp;
    j["gp"] = {{"populationSize", g.population_size},   {"crossoverRate", g.crossover_rate},
               {"mutationRate", g.mutation_rate},       {"maxDepth", g.max_depth},
               {"tournamentSize", g.tournament_size},   {"maxGenerations", g.max_generations},
               {"stagnationWindow", g.stagnation_window}, {"eqTolerance", g.eval.eq_tolerance}};
    j["art"] = {{"candidateSetSize", s.art.candidate_set_size}, {"normalize", s.art.normalize}};
    j["runs"] = s.runs;
    j["killTolerance"] = s.kill_tolerance;
    j["timeoutMs"] = s.timeout_ms;
    j["jobs"] = s.jobs;
    j["topK"] = s.top_k;
    return j;
}

template <typename T>
void read_field(const json& j, const std::string& path, T& target) {
    try {
        target = j.get<T>();
    } catch (const json::exception&) {
        throw ValidationError(path, "has the wrong type");
    }
}

void apply_config(const json& j, Settings& s) {
    if (!j.is_object()) {
        throw ValidationError("config", "must be a JSON object");
    }
    for (const auto& [key, v] : j.items()) {
        if (key == "seed") read_field(v, key, s.seed);
        else if (key == "spec") read_field(v, key, s.spec);
        else if (key == "tests") read_field(v, key, s.tests);
        else if (key == "fixture") read_field(v, key, s.fixture);
        else if (key == "iterations") read_field(v, key, s.tbc.iterations);
        else if (key == "testsPerIteration") read_field(v, key, s.tbc.tests_per_iteration);
        else if (key == "randomPoolSize") read_field(v, key, s.tbc.random_pool_size);
        else if (key == "committeeSize") read_field(v, key, s.tbc.committee_size);
        else if (key == "substitutionValue") read_field(v, key, s.tbc.substitution_value);
        else if (key == "warmStart") read_field(v, key, s.tbc.warm_start);
        else if (key == "runs") read_field(v, key, s.runs);
        else if (key == "killTolerance") read_field(v, key, s.kill_tolerance);
        else if (key == "timeoutMs") read_field(v, key, s.timeout_ms);
        else if (key == "jobs") read_field(v, key, s.jobs);
        else if (key == "topK") read_field(v, key, s.top_k);
        else if (key == "gp") {
            if (!v.is_object()) {
                throw ValidationError("gp", "must be a JSON object");
            }
            GpConfig& g = s.tbc.gp;
            for (const auto& [k, w] : v.items()) {
                const std::string path = "gp." + k;
                if (k == "populationSize") read_field(w, path, g.population_size);
                else if (k == "crossoverRate") read_field(w, path, g.crossover_rate);
                else if (k == "mutationRate") read_field(w, path, g.mutation_rate);
                else if (k == "maxDepth") read_field(w, path, g.max_depth);
                else if (k == "tournamentSize") read_field(w, path, g.tournament_size);
                else if (k == "maxGenerations") read_field(w, path, g.max_generations);
                else if (k == "stagnationWindow") read_field(w, path, g.stagnation_window);
                else if (k == "eqTolerance") read_field(w, path, g.eval.eq_tolerance);
                else throw ValidationError(path, "unknown configuration field");
            }
        } else if (key == "art") {
            if (!v.is_object()) {
                throw ValidationError("art", "must be a JSON object");
            }
            for (const auto& [k, w] : v.items()) {
                const std::string path = "art." + k;
                if (k == "candidateSetSize") read_field(w, path, s.art.candidate_set_size);
                else if (k == "normalize") read_field(w, path, s.art.normalize);
                else throw ValidationError(path, "unknown configuration field");
            }
        } else {
            throw ValidationError(key, "unknown configuration field");
        }
    }
}

// A config file is either a JSON object or a campaign log whose first line holds {"config": ...}.
json load_config(const std::string& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error&) {
        const auto eol = text.find('\n');
        try {
            j = json::parse(text.substr(0, eol));
        } catch (const json::parse_error& e) {
            throw ParseError(path + ": " + e.what(), e.byte);
        }
    }
    if (j.is_object() && j.contains("config")) {
        return j["config"];
    }
    return j;
}

Settings resolve(const Flags& f) {
    Settings s;
    if (f.preset == "desk") {
        s.tbc.iterations = 30;
        s.tbc.tests_per_iteration = 5;
        s.tbc.gp.population_size = 200;
        s.runs = 10;
    } else if (!f.preset.empty() && f.preset != "paper") {
        throw ValidationError("preset", "unknown preset \"" + f.preset + "\" (expected desk or paper)");
    }
    if (!f.config.empty()) {
        apply_config(load_config(f.config), s);
    }
    auto set = [](const auto& flag, auto& target) {
        if (flag) {
            target = *flag;
        }
    };
    set(f.population, s.tbc.gp.population_size);
    set(f.crossover, s.tbc.gp.crossover_rate);
    set(f.mutation, s.tbc.gp.mutation_rate);
    set(f.max_depth, s.tbc.gp.max_depth);
    set(f.tournament, s.tbc.gp.tournament_size);
    set(f.generations, s.tbc.gp.max_generations);
    set(f.stagnation, s.tbc.gp.stagnation_window);
    set(f.iterations, s.tbc.iterations);
    set(f.per_iteration, s.tbc.tests_per_iteration);
    set(f.pool, s.tbc.random_pool_size);
    set(f.committee, s.tbc.committee_size);
    set(f.substitution, s.tbc.substitution_value);
    set(f.candidates, s.art.candidate_set_size);
    set(f.runs, s.runs);
    set(f.kill_tolerance, s.kill_tolerance);
    set(f.timeout, s.timeout_ms);
    set(f.jobs, s.jobs);
    set(f.top_k, s.top_k);
    set(f.seed, s.seed);
    if (f.warm_start) {
        s.tbc.warm_start = true;
    }
    if (f.normalize) {
        s.art.normalize = true;
    }
    if (!f.spec.empty()) {
        s.spec = f.spec;
    }
    if (!f.tests.empty()) {
        s.tests = f.tests;
    }
    if (!f.fixture.empty()) {
        s.fixture = f.fixture;
    }
    // the GP shares the campaign's substitution value
    s.tbc.gp.substitution_value = s.tbc.substitution_value;
    try {
        s.tbc.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError("config", e.what());
    }
    if (s.art.candidate_set_size < 1) {
        throw ValidationError("candidateSetSize", "must be positive");
    }
    if (s.runs < 1) {
        throw ValidationError("runs", "must be at least 1");
    }
    if (s.timeout_ms < 1) {
        throw ValidationError("timeoutMs", "must be positive");
    }
    if (s.jobs < 1) {
        throw ValidationError("jobs", "must be at least 1");
    }
    if (s.top_k < 1) {
        throw ValidationError("topK", "must be at least 1");
    }
    if (!(s.kill_tolerance >= 0.0)) {
        throw ValidationError("killTolerance", "must be non-negative");
    }
    return s;
}

void add_config_flags(CLI::App* app, Flags& f) {
    app->add_option("--seed", f.seed, "Seed for all randomness (default 0)");
    app->add_option("--config", f.config, "JSON config file or campaign log to resume settings from");
    app->add_option("--preset", f.preset, "desk (i=30, s=5, population 200, 10 runs) or paper (defaults)");
    app->add_option("--population", f.population, "GP population size (800)");
    app->add_option("--crossover", f.crossover, "Crossover probability (0.9)");
    app->add_option("--mutation", f.mutation, "Mutation probability (0.1)");
    app->add_option("--max-depth", f.max_depth, "Maximum tree depth (10)");
    app->add_option("--tournament", f.tournament, "Tournament size (6)");
    app->add_option("--generations", f.generations, "Maximum GP generations (50)");
    app->add_option("--stagnation", f.stagnation, "Generations without improvement before stopping (15)");
    app->add_option("--iterations", f.iterations, "TBC iterations i (60)");
    app->add_option("--per-iteration", f.per_iteration, "Tests added per iteration s (5)");
    app->add_option("--pool", f.pool, "Random pool size (1000)");
    app->add_option("--committee", f.committee, "Committee size (10)");
    app->add_option("--substitution", f.substitution, "Value replacing non-finite outputs (1e7)");
    app->add_flag("--warm-start", f.warm_start, "Seed each GP run with the previous population");
    app->add_option("--candidates", f.candidates, "ART candidate set size (10)");
    app->add_flag("--normalize", f.normalize, "Normalize ART distances by parameter range");
    app->add_option("--runs", f.runs, "Seeded runs per strategy in compare (30)");
    app->add_option("--kill-tolerance", f.kill_tolerance, "Relative kill tolerance (1e-9)");
    app->add_option("--timeout", f.timeout, "Per-execution timeout in ms (5000)");
    app->add_option("--jobs", f.jobs, "Concurrent runs in compare (1)");
}

void add_subject_flags(CLI::App* app, Flags& f) {
    app->add_option("--spec", f.spec, "Interface specification (JSON)");
    app->add_option("--tests", f.tests, "Seed test file");
    app->add_option("--fixture", f.fixture, "Built-in fixture id instead of --spec");
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

fs::path prepare_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir + ": " + ec.message());
    }
    return fs::path(dir);
}

struct Subject {
    InterfaceSpec spec;
    SutHandle handle;
    std::vector<InputVector> seeds;
};

// External programs are assumed deterministic; run one sample twice to catch the obvious
// violations. Execution failures are left for the campaign to report with partial artifacts.
void check_repeatable(const Subject& subject) {
    if (!std::holds_alternative<ExternalSut>(subject.handle) || subject.seeds.empty()) {
        return;
    }
    const InputVector& sample = subject.seeds.front();
    double first = 0.0;
    double second = 0.0;
    try {
        first = execute(subject.handle, sample);
        second = execute(subject.handle, sample);
    } catch (const ExecutionError&) {
        return;
    }
    if (outputs_differ(first, second)) {
        throw ExecutionError("system under test is not deterministic: " + format_input(sample) + " gave " +
                             format_double(first) + " then " + format_double(second));
    }
}

Subject load_subject(const Settings& s, bool need_seeds) {
    Subject subject;
    if (!s.spec.empty() && !s.fixture.empty()) {
        throw ValidationError("spec", "give either --spec or --fixture, not both");
    }
    if (!s.fixture.empty()) {
        const Fixture& f = find_fixture(s.fixture);
        subject.spec = f.interface();
        subject.handle = BuiltinSut{f.id, std::nullopt};
        subject.seeds = f.seed_tests;
    } else if (!s.spec.empty()) {
        subject.spec = parse_interface_spec(read_file(s.spec));
        std::string base = fs::path(s.spec).parent_path().string();
        subject.handle = handle_for(subject.spec, base.empty() ? "." : base, std::chrono::milliseconds(s.timeout_ms));
    } else {
        throw ValidationError("spec", "one of --spec or --fixture is required");
    }
    if (!s.tests.empty()) {
        subject.seeds = parse_test_inputs(read_file(s.tests), subject.spec);
    } else if (need_seeds && s.fixture.empty()) {
        throw ValidationError("tests", "--tests is required with --spec");
    }
    if (need_seeds && subject.seeds.empty()) {
        throw ValidationError("tests", "the seed test set is empty");
    }
    check_repeatable(subject);
    return subject;
}

std::string outputs_text(const std::vector<Execution>& executions) {
    std::string text;
    for (const auto& e : executions) {
        text += format_double(e.observed);
        text += '\n';
    }
    return text;
}

std::string suite_text(const std::vector<Execution>& executions) {
    std::vector<InputVector> inputs;
    inputs.reserve(executions.size());
    for (const auto& e : executions) {
        inputs.push_back(e.input);
    }
    return inputs.empty() ? std::string() : write_test_inputs(inputs);
}

void write_suite(const fs::path& out, const std::vector<Execution>& executions, const std::string& log) {
    write_text(out / "suite.txt", suite_text(executions));
    write_text(out / "outputs.txt", outputs_text(executions));
    write_text(out / "campaign.jsonl", log);
}

std::string config_line(const Settings& s, std::string_view command) {
    json head;
    head["command"] = command;
    head["config"] = settings_json(s);
    return head.dump() + "\n";
}

int run_generate(const Flags& flags, std::ostream& err) {
    const Settings s = resolve(flags);
    const Subject subject = load_subject(s, true);
    const fs::path out = prepare_out(flags.out);
    std::string log = config_line(s, "generate");
    Rng rng(s.seed);
    auto last = std::chrono::steady_clock::now();
    auto observer = [&](const IterationRecord& r, const std::vector<Execution>& executions) {
        const auto now = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(now - last).count();
        last = now;
        json rec;
        rec["iteration"] = r.iteration;
        rec["bestFitnessError"] = number(r.best_fitness_error);
        rec["generations"] = r.generations;
        rec["committeeSize"] = r.committee_size;
        rec["suiteSize"] = executions.size();
        json selected = json::array();
        for (const auto& sel : r.selected) {
            selected.push_back({{"input", format_input(sel.execution.input)},
                                {"observed", number(sel.execution.observed)},
                                {"mad", number(sel.mad)},
                                {"poolIndex", sel.pool_index}});
        }
        rec["selected"] = selected;
        rec["committee"] = r.committee_models;
        if (flags.log_timing) {
            rec["wallClockMs"] = ms;
        }
        log += rec.dump() + "\n";
        err << "iteration " << r.iteration << "/" << s.tbc.iterations << " best error "
            << format_double(r.best_fitness_error) << " (" << static_cast<long long>(ms) << " ms)\n";
    };
    const Executor executor = [&](const InputVector& in) { return execute(subject.handle, in); };
    try {
        const TbcResult result = run_tbc(subject.spec, subject.seeds, s.tbc, executor, rng, observer);
        write_suite(out, result.executions, log);
        err << "wrote " << result.executions.size() << " tests to " << (out / "suite.txt").string() << "\n";
    } catch (const CampaignError& e) {
        write_suite(out, e.partial().executions, log);
        throw;
    }
    return kExitOk;
}

int run_baseline(const Flags& flags, const std::string& strategy_text, std::ostream& err) {
    const Strategy strategy = parse_strategy(strategy_text);
    if (strategy == Strategy::Tbc) {
        throw ValidationError("strategy", "baseline takes random or art; use generate for tbc");
    }
    const Settings s = resolve(flags);
    const Subject subject = load_subject(s, true);
    const fs::path out = prepare_out(flags.out);
    std::string log = config_line(s, std::string("baseline ") + std::string(strategy_name(strategy)));
    Rng rng(s.seed);
    const std::size_t per = static_cast<std::size_t>(s.tbc.tests_per_iteration);
    const std::size_t budget = subject.seeds.size() + per * static_cast<std::size_t>(s.tbc.iterations);
    const auto inputs = generate_suite(strategy, subject.spec, subject.seeds, budget, s.art, rng);
    std::vector<Execution> executions;
    try {
        for (const auto& in : inputs) {
            executions.push_back({in, execute(subject.handle, in)});
        }
    } catch (const ExecutionError&) {
        write_suite(out, executions, log);
        throw;
    }
    for (int it = 1; it <= s.tbc.iterations; ++it) {
        const std::size_t begin = subject.seeds.size() + per * static_cast<std::size_t>(it - 1);
        json selected = json::array();
        for (std::size_t k = begin; k < begin + per; ++k) {
            selected.push_back(
                {{"input", format_input(executions[k].input)}, {"observed", number(executions[k].observed)}});
        }
        json rec;
        rec["iteration"] = it;
        rec["suiteSize"] = begin + per;
        rec["selected"] = selected;
        log += rec.dump() + "\n";
    }
    write_suite(out, executions, log);
    err << "wrote " << executions.size() << " tests to " << (out / "suite.txt").string() << "\n";
    return kExitOk;
}

std::vector<double> parse_outputs(const std::string& path) {
    std::vector<double> values;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t number_of_line = 0;
    while (std::getline(in, line)) {
        ++number_of_line;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto v = parse_sut_output(line);
        if (!v) {
            throw ParseError(path + ": line " + std::to_string(number_of_line) + " is not a number", 0,
                             number_of_line);
        }
        values.push_back(*v);
    }
    return values;
}

int run_evaluate(const Flags& flags, const std::string& suite_path, const std::string& outputs_path,
                 std::ostream& err) {
    const Settings s = resolve(flags);
    if (s.fixture.empty()) {
        throw ValidationError("fixture", "--fixture is required");
    }
    const Fixture& fixture = find_fixture(s.fixture);
    const auto inputs = parse_test_inputs(read_file(suite_path), fixture.interface());
    std::vector<Execution> tests;
    if (!outputs_path.empty()) {
        const auto observed = parse_outputs(outputs_path);
        if (observed.size() != inputs.size()) {
            throw ValidationError("outputs", "has " + std::to_string(observed.size()) + " values for " +
                                                 std::to_string(inputs.size()) + " tests");
        }
        for (std::size_t k = 0; k < inputs.size(); ++k) {
            tests.push_back({inputs[k], observed[k]});
        }
    } else {
        for (const auto& in : inputs) {
            tests.push_back({in, fixture.reference(in)});
        }
    }
    const fs::path out = prepare_out(flags.out);
    const auto records = kills(tests, fixture, s.kill_tolerance);
    json j;
    j["fixture"] = fixture.id;
    j["tests"] = tests.size();
    j["mutants"] = records.size();
    j["killed"] = kill_count(records);
    j["killTolerance"] = s.kill_tolerance;
    json list = json::array();
    for (const auto& r : records) {
        json rec = {{"mutant", r.mutant}, {"name", r.name}, {"killed", r.killed}};
        rec["witness"] = r.witness ? json(format_input(*r.witness)) : json(nullptr);
        list.push_back(rec);
    }
    j["records"] = list;
    write_text(out / "kills.json", j.dump(2) + "\n");
    err << "killed " << kill_count(records) << "/" << records.size() << " mutants\n";
    return kExitOk;
}

int run_compare(const Flags& flags, std::ostream& err) {
    const Settings s = resolve(flags);
    if (s.fixture.empty()) {
        throw ValidationError("fixture", "--fixture is required");
    }
    const Fixture& fixture = find_fixture(s.fixture);
    const std::vector<InputVector> seeds =
        s.tests.empty() ? fixture.seed_tests : parse_test_inputs(read_file(s.tests), fixture.interface());
    const fs::path out = prepare_out(flags.out);
    CampaignOptions options;
    options.tbc = s.tbc;
    options.art = s.art;
    options.kill_tolerance = s.kill_tolerance;
    options.jobs = s.jobs;
    std::vector<std::uint64_t> rng_seeds;
    for (int k = 0; k < s.runs; ++k) {
        rng_seeds.push_back(s.seed + static_cast<std::uint64_t>(k));
    }
    json config;
    config["command"] = "compare";
    config["config"] = settings_json(s);
    write_text(out / "config.json", config.dump(2) + "\n");

    std::vector<CampaignReport> all;
    for (Strategy strategy : {Strategy::Tbc, Strategy::Random, Strategy::Art}) {
        const auto start = std::chrono::steady_clock::now();
        try {
            auto reports = run_campaign(strategy, fixture.id, seeds, options, rng_seeds);
            all.insert(all.end(), reports.begin(), reports.end());
        } catch (const HarnessError& e) {
            all.insert(all.end(), e.completed().begin(), e.completed().end());
            const auto text = emit_report(all);
            write_text(out / "report.csv", text.csv);
            throw;
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        err << strategy_name(strategy) << ": " << s.runs << " runs in " << static_cast<long long>(secs) << " s\n";
    }
    const auto text = emit_report(all);
    write_text(out / "report.csv", text.csv);
    write_text(out / "summary.json", text.summary);
    return kExitOk;
}

int run_infer(const Flags& flags, const std::string& outputs_path, std::ostream& err) {
    const Settings s = resolve(flags);
    const Subject subject = load_subject(s, true);
    std::vector<Execution> train;
    if (!outputs_path.empty()) {
        const auto observed = parse_outputs(outputs_path);
        if (observed.size() != subject.seeds.size()) {
            throw ValidationError("outputs", "has " + std::to_string(observed.size()) + " values for " +
                                                 std::to_string(subject.seeds.size()) + " tests");
        }
        for (std::size_t k = 0; k < observed.size(); ++k) {
            train.push_back({subject.seeds[k], observed[k]});
        }
    } else {
        for (const auto& in : subject.seeds) {
            train.push_back({in, execute(subject.handle, in)});
        }
    }
    const fs::path out = prepare_out(flags.out);
    Rng rng(s.seed);
    const Population pop = infer(train, s.tbc.gp, subject.spec, rng);
    json models = json::array();
    const std::size_t k = std::min(pop.members.size(), static_cast<std::size_t>(s.top_k));
    for (std::size_t r = 0; r < k; ++r) {
        const auto& m = pop.members[r];
        models.push_back({{"rank", r},
                          {"model", render(m.tree, subject.spec)},
                          {"error", number(m.error)},
                          {"size", m.tree.size()},
                          {"depth", depth(m.tree)}});
    }
    json j;
    j["command"] = "infer";
    j["config"] = settings_json(s);
    j["generations"] = pop.generation;
    j["models"] = models;
    write_text(out / "models.json", j.dump(2) + "\n");
    err << "best error " << format_double(pop.best().error) << " after " << pop.generation << " generations\n";
    return kExitOk;
}

void list_fixtures(std::ostream& out) {
    for (const auto& f : catalog()) {
        out << f.id << "\t" << f.parameters.size() << " parameters\t" << f.mutants.size() << " mutants\t"
            << f.description << "\n";
    }
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Test generation by committee of inferred models", "tbc"};
    app.require_subcommand(1);
    Flags flags;
    std::string strategy;
    std::string suite_path;
    std::string outputs_path;

    auto* generate = app.add_subcommand("generate", "Generate a test suite with testing by committee");
    add_subject_flags(generate, flags);
    add_config_flags(generate, flags);
    generate->add_option("--out", flags.out, "Output directory (default .)");
    generate->add_flag("--log-timing", flags.log_timing, "Record wall-clock times in the campaign log");

    auto* baseline = app.add_subcommand("baseline", "Generate a random or ART suite of equal budget");
    add_subject_flags(baseline, flags);
    add_config_flags(baseline, flags);
    baseline->add_option("--strategy", strategy, "random or art")->required();
    baseline->add_option("--out", flags.out, "Output directory (default .)");

    auto* evaluate = app.add_subcommand("evaluate", "Count the fixture mutants a suite kills");
    evaluate->add_option("--fixture", flags.fixture, "Built-in fixture id")->required();
    evaluate->add_option("--suite", suite_path, "Test file")->required();
    evaluate->add_option("--outputs", outputs_path, "Observed outputs, one per test (default: run the fixture)");
    evaluate->add_option("--kill-tolerance", flags.kill_tolerance, "Relative kill tolerance (1e-9)");
    evaluate->add_option("--config", flags.config, "JSON config file or campaign log");
    evaluate->add_option("--out", flags.out, "Output directory (default .)");

    auto* compare = app.add_subcommand("compare", "Run all three strategies on a fixture and report kills");
    compare->add_option("--fixture", flags.fixture, "Built-in fixture id")->required();
    compare->add_option("--tests", flags.tests, "Seed tests (default: the fixture's own)");
    add_config_flags(compare, flags);
    compare->add_option("--out", flags.out, "Output directory (default .)");

    auto* infer_cmd = app.add_subcommand("infer", "Infer models from labeled tests and dump the best");
    add_subject_flags(infer_cmd, flags);
    add_config_flags(infer_cmd, flags);
    infer_cmd->add_option("--outputs", outputs_path, "Observed outputs, one per test (default: run the SUT)");
    infer_cmd->add_option("--top-k", flags.top_k, "Models to dump (10)");
    infer_cmd->add_option("--out", flags.out, "Output directory (default .)");

    auto* fixtures = app.add_subcommand("fixtures", "List the built-in fixtures");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (generate->parsed()) {
            return run_generate(flags, err);
        }
        if (baseline->parsed()) {
            return run_baseline(flags, strategy, err);
        }
        if (evaluate->parsed()) {
            return run_evaluate(flags, suite_path, outputs_path, err);
        }
        if (compare->parsed()) {
            return run_compare(flags, err);
        }
        if (infer_cmd->parsed()) {
            return run_infer(flags, outputs_path, err);
        }
        if (fixtures->parsed()) {
            list_fixtures(out);
            return kExitOk;
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    err << app.help();
    return kExitUsage;
}

} // namespace tbc::cli
