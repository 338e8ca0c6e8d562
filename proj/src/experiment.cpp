#include "chargeopt/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>

#include <nlohmann/json.hpp>

#include "chargeopt/errors.hpp"
#include "chargeopt/util.hpp"

namespace chargeopt {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

[[noreturn]] void config_fail(int line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

// Scalar value text -> typed value; `line` only feeds error messages.
ConfigValue parse_scalar(const std::string& text, int line) {
    ConfigValue v;
    if (text.empty()) config_fail(line, "empty value");
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"')
            config_fail(line, "unterminated string");
        v.kind = ConfigValue::Kind::String;
        v.str = text.substr(1, text.size() - 2);
        return v;
    }
    if (text == "true" || text == "false") {
        v.kind = ConfigValue::Kind::Boolean;
        v.boolean = text == "true";
        return v;
    }
    std::size_t used = 0;
    try {
        v.num = std::stod(text, &used);
    } catch (const std::exception&) {
        config_fail(line, "expected a string, number, or boolean, got '" + text + "'");
    }
    if (used != text.size())
        config_fail(line, "trailing characters after number in '" + text + "'");
    v.kind = ConfigValue::Kind::Number;
    return v;
}

// Strips a trailing # comment, respecting double-quoted strings.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t p = 0; p < s.size(); ++p) {
        if (s[p] == '"') quoted = !quoted;
        else if (s[p] == '#' && !quoted) return s.substr(0, p);
    }
    return s;
}

} // namespace

ConfigTable parse_config(const std::string& text) {
    ConfigTable table;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        line = trim(strip_comment(line));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') config_fail(line_no, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) config_fail(line_no, "empty section name");
            table[section]; // sections may legitimately stay empty
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) config_fail(line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) config_fail(line_no, "empty key");
        if (table[section].count(key))
            config_fail(line_no, "duplicate key '" + key + "'");

        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') config_fail(line_no, "unterminated array");
            ConfigValue arr;
            arr.kind = ConfigValue::Kind::Array;
            const std::string inner = trim(value.substr(1, value.size() - 2));
            if (!inner.empty()) {
                std::size_t start = 0;
                bool quoted = false;
                for (std::size_t p = 0; p <= inner.size(); ++p) {
                    if (p < inner.size() && inner[p] == '"') quoted = !quoted;
                    if (p == inner.size() || (inner[p] == ',' && !quoted)) {
                        arr.items.push_back(parse_scalar(trim(inner.substr(start, p - start)),
                                                         line_no));
                        start = p + 1;
                    }
                }
            }
            table[section][key] = std::move(arr);
        } else {
            table[section][key] = parse_scalar(value, line_no);
        }
    }
    return table;
}

namespace {

class SectionReader {
public:
    SectionReader(const ConfigTable& table, const std::string& section)
        : section_(section) {
        auto it = table.find(section);
        if (it != table.end()) entries_ = &it->second;
    }

    bool present() const { return entries_ != nullptr; }
    bool has(const std::string& key) const { return entries_ && entries_->count(key); }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        const ConfigValue* v = find(key);
        if (!v) return fallback;
        if (v->kind != ConfigValue::Kind::String) fail(key, "expected a string");
        return v->str;
    }
    double get_number(const std::string& key, double fallback) const {
        const ConfigValue* v = find(key);
        if (!v) return fallback;
        if (v->kind != ConfigValue::Kind::Number) fail(key, "expected a number");
        return v->num;
    }
    std::int64_t get_integer(const std::string& key, std::int64_t fallback) const {
        const double d = get_number(key, static_cast<double>(fallback));
        const std::int64_t i = static_cast<std::int64_t>(d);
        if (static_cast<double>(i) != d) fail(key, "expected an integer");
        return i;
    }
    bool get_bool(const std::string& key, bool fallback) const {
        const ConfigValue* v = find(key);
        if (!v) return fallback;
        if (v->kind != ConfigValue::Kind::Boolean) fail(key, "expected true or false");
        return v->boolean;
    }
    const ConfigValue* get_array(const std::string& key) const {
        const ConfigValue* v = find(key);
        if (v && v->kind != ConfigValue::Kind::Array) fail(key, "expected an array");
        return v;
    }

    void require_known(std::initializer_list<const char*> known) const {
        if (!entries_) return;
        for (const auto& [key, value] : *entries_) {
            bool ok = false;
            for (const char* k : known) ok = ok || key == k;
            if (!ok) fail(key, "unknown key");
        }
    }

private:
    const ConfigValue* find(const std::string& key) const {
        if (!entries_) return nullptr;
        auto it = entries_->find(key);
        return it == entries_->end() ? nullptr : &it->second;
    }
    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError("[" + section_ + "] " + key + ": " + msg);
    }

    std::string section_;
    const std::map<std::string, ConfigValue>* entries_ = nullptr;
};

} // namespace

ExperimentConfig config_from_text(const std::string& text) {
    const ConfigTable table = parse_config(text);
    for (const auto& [section, entries] : table) {
        static const std::set<std::string> known = {"instance", "estimation", "variants",
                                                    "solver", "evaluation", "output"};
        if (!known.count(section)) throw ConfigError("unknown section [" + section + "]");
    }

    ExperimentConfig cfg;

    SectionReader instance(table, "instance");
    instance.require_known({"path", "seed", "nodes", "utilization", "box_size", "speed"});
    cfg.instance_path = instance.get_string("path", "");
    if (instance.has("seed"))
        cfg.generate_seed = static_cast<std::uint64_t>(instance.get_integer("seed", 42));
    if (!cfg.instance_path.empty() && cfg.generate_seed)
        throw ConfigError("[instance] give either path or a generator seed, not both");
    if (cfg.instance_path.empty() && !cfg.generate_seed)
        throw ConfigError("[instance] needs a path or a generator seed");
    cfg.generator.node_count = static_cast<int>(instance.get_integer("nodes", 31));
    cfg.generator.utilization_target = instance.get_number("utilization", 0.6);
    cfg.generator.box_size = instance.get_number("box_size", 40.0);
    cfg.generator.speed = instance.get_number("speed", 1.0);

    SectionReader estimation(table, "estimation");
    estimation.require_known({"n", "seed", "method", "rho", "sweep"});
    cfg.estimation_n = static_cast<std::size_t>(estimation.get_integer("n", 10000));
    if (cfg.estimation_n == 0) throw ConfigError("[estimation] n must be positive");
    cfg.estimation_seed = static_cast<std::uint64_t>(estimation.get_integer("seed", 7));
    cfg.estimation_method = method_from_name(estimation.get_string("method", "cv"));
    cfg.rho = estimation.get_number("rho", kDefaultRho);
    if (const ConfigValue* sweep = estimation.get_array("sweep")) {
        cfg.sweep.clear();
        for (const auto& item : sweep->items) {
            if (item.kind != ConfigValue::Kind::Number || item.num < 1 ||
                item.num != std::floor(item.num))
                throw ConfigError("[estimation] sweep entries must be positive integers");
            cfg.sweep.push_back(static_cast<std::size_t>(item.num));
        }
        if (cfg.sweep.empty()) throw ConfigError("[estimation] sweep must be nonempty");
    }

    SectionReader variants(table, "variants");
    variants.require_known({"labels", "baseline"});
    if (const ConfigValue* labels = variants.get_array("labels")) {
        for (const auto& item : labels->items) {
            if (item.kind != ConfigValue::Kind::String)
                throw ConfigError("[variants] labels must be strings");
            cfg.variants.push_back(variant_from_label(item.str));
        }
    }
    if (cfg.variants.empty()) throw ConfigError("[variants] labels must list at least one variant");
    {
        std::set<std::string> seen;
        for (const auto& v : cfg.variants)
            if (!seen.insert(variant_label(v)).second)
                throw ConfigError("[variants] duplicate label '" + variant_label(v) + "'");
    }
    cfg.baseline = variants.get_string("baseline", variant_label(cfg.variants.front()));
    {
        bool found = false;
        for (const auto& v : cfg.variants) found = found || variant_label(v) == cfg.baseline;
        if (!found)
            throw ConfigError("[variants] baseline '" + cfg.baseline +
                              "' is not among the labels");
    }

    SectionReader solver(table, "solver");
    solver.require_known({"tight_big_m", "fix_y_to_x", "node_limit", "rel_gap", "time_limit"});
    cfg.build.tight_big_m = solver.get_bool("tight_big_m", true);
    cfg.build.fix_y_to_x = solver.get_bool("fix_y_to_x", true);
    cfg.solver.node_limit = solver.get_integer("node_limit", -1);
    cfg.solver.rel_gap_tol = solver.get_number("rel_gap", BnBConfig{}.rel_gap_tol);
    if (cfg.solver.rel_gap_tol < 0) throw ConfigError("[solver] rel_gap must be nonnegative");
    // Wall-clock stops make rerun artifacts diverge; prefer node_limit when
    // the run must be reproducible byte for byte.
    cfg.solver.time_limit_seconds = solver.get_number("time_limit", -1.0);

    SectionReader evaluation(table, "evaluation");
    evaluation.require_known({"n_eval", "seed", "methods"});
    cfg.n_eval = evaluation.get_integer("n_eval", 10000);
    if (cfg.n_eval < 1) throw ConfigError("[evaluation] n_eval must be positive");
    cfg.eval_seed = static_cast<std::uint64_t>(evaluation.get_integer("seed", 1001));
    if (const ConfigValue* methods = evaluation.get_array("methods")) {
        cfg.eval_methods.clear();
        for (const auto& item : methods->items) {
            if (item.kind != ConfigValue::Kind::String)
                throw ConfigError("[evaluation] methods must be strings");
            const EstimatorMethod m = method_from_name(item.str);
            if (m == EstimatorMethod::Analytic)
                throw ConfigError("[evaluation] methods must be mc or cv");
            cfg.eval_methods.push_back(m);
        }
        if (cfg.eval_methods.empty())
            throw ConfigError("[evaluation] methods must be nonempty");
    }

    SectionReader output(table, "output");
    output.require_known({"dir"});
    cfg.output_dir = output.get_string("dir", cfg.output_dir);
    if (cfg.output_dir.empty()) throw ConfigError("[output] dir must be nonempty");

    return cfg;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct ArtifactWriter {
    std::filesystem::path root;
    std::map<std::string, std::string> checksums;

    void write(const std::string& relative, const std::string& content) {
        write_text_file_atomic((root / relative).string(), content);
        checksums[relative] = fnv1a64_hex(content);
    }
};

} // namespace

ExperimentArtifacts run_experiment(const ExperimentConfig& config,
                                   const std::string& config_text) {
    if (config.eval_seed == config.estimation_seed)
        std::fprintf(stderr,
                     "warning: evaluation seed equals the estimation seed (%llu); "
                     "out-of-sample scores will reuse training scenarios\n",
                     static_cast<unsigned long long>(config.eval_seed));

    ArtifactWriter out;
    out.root = config.output_dir;
    std::filesystem::create_directories(out.root / "solutions");
    std::filesystem::create_directories(out.root / "reports");

    log_info("experiment: preparing instance");
    Instance inst;
    if (!config.instance_path.empty()) {
        inst = load_instance(config.instance_path);
    } else {
        inst = generate_synthetic_demand(embedded_surabaya_parameters(), config.generator,
                                         *config.generate_seed);
    }
    out.write("instance.json", instance_to_json(inst));
    const std::string inst_checksum = instance_checksum(inst);

    // Reliability estimation sweep: the data behind the p_hat and SE figures.
    log_info("experiment: reliability sweep");
    std::string estimates_csv = "station,n,method,p_hat,se\n";
    for (std::size_t n : config.sweep) {
        for (EstimatorMethod method : {EstimatorMethod::MC, EstimatorMethod::CV}) {
            const ReliabilityEstimates est =
                estimate_reliabilities(inst, n, config.estimation_seed, method, config.rho);
            for (const auto& s : est.stations) {
                estimates_csv += std::to_string(s.station_id);
                estimates_csv += ',' + std::to_string(n);
                estimates_csv += ',' + method_name(method);
                estimates_csv += ',' + format_double(s.p_hat, 17);
                estimates_csv += ',' + format_double(s.std_err, 17);
                estimates_csv += '\n';
            }
        }
    }
    out.write("estimates.csv", estimates_csv);

    const ReliabilityEstimates estimates = estimate_reliabilities(
        inst, config.estimation_n, config.estimation_seed, config.estimation_method, config.rho);
    out.write("estimates.json", estimates_to_json(estimates));

    // One exact solve per variant.
    std::vector<SolutionSummary> solutions;
    for (const Variant& variant : config.variants) {
        const std::string label = variant_label(variant);
        log_info("experiment: solving " + label);
        const MipProblem prob = build_model(inst, estimates, variant, config.build);
        const PresolveResult pre = presolve(prob, inst);
        if (pre.infeasible)
            throw InfeasibleError("variant " + label + " is infeasible: " + pre.reason);
        const MipResult res = solve_mip(pre.problem, config.solver);
        if (res.status == MipStatus::Infeasible)
            throw InfeasibleError("variant " + label + " is infeasible");
        if (res.values.empty())
            throw DomainError("variant " + label + " hit the node limit with no incumbent");

        const SolutionSummary summary =
            extract_solution(prob, res.values, &pre.map, res.objective);
        SolutionArtifact artifact;
        artifact.summary = summary;
        artifact.instance_checksum = inst_checksum;
        artifact.status = mip_status_name(res.status);
        artifact.best_bound = res.best_bound;
        artifact.nodes = res.nodes;
        artifact.train_seed = config.estimation_seed;
        out.write("solutions/" + label + ".json", solution_to_json(artifact));
        out.write("solutions/" + label + ".log",
                  "node, depth, bound, incumbent, gap\n" + res.log);
        solutions.push_back(summary);
    }

    // Out-of-sample traces across the sweep, then full-size reports.
    log_info("experiment: out-of-sample evaluation");
    std::string objective_trace = "variant,method,n,mean_obj,se_obj,ci_low,ci_high\n";
    std::string se_trace = "variant,method,n,se_obj\n";
    for (std::size_t q = 0; q < solutions.size(); ++q) {
        const std::string label = variant_label(config.variants[q]);
        for (EstimatorMethod method : config.eval_methods) {
            for (std::size_t n : config.sweep) {
                const EvaluationReport rep =
                    evaluate_solution(inst, solutions[q], static_cast<std::int64_t>(n),
                                      config.eval_seed, method, config.rho);
                const std::string prefix =
                    label + ',' + method_name(method) + ',' + std::to_string(n) + ',';
                objective_trace += prefix + format_double(rep.mean_objective, 17) + ',' +
                                   format_double(rep.se_objective, 17) + ',' +
                                   format_double(rep.mean_objective - 1.96 * rep.se_objective, 17) +
                                   ',' +
                                   format_double(rep.mean_objective + 1.96 * rep.se_objective, 17) +
                                   '\n';
                se_trace += prefix + format_double(rep.se_objective, 17) + '\n';
            }
        }
    }
    out.write("objective_trace.csv", objective_trace);
    out.write("se_trace.csv", se_trace);

    std::string comparison;
    for (EstimatorMethod method : config.eval_methods) {
        std::vector<EvaluationReport> reports;
        for (std::size_t q = 0; q < solutions.size(); ++q) {
            const std::string label = variant_label(config.variants[q]);
            EvaluationReport rep = evaluate_solution(inst, solutions[q], config.n_eval,
                                                     config.eval_seed, method, config.rho);
            out.write("reports/" + label + "-" + lower(method_name(method)) + ".json",
                      report_to_json(rep));
            reports.push_back(std::move(rep));
        }
        const ComparisonTable table = compare_models(reports, config.baseline);
        const std::string csv = comparison_to_csv(table);
        if (comparison.empty())
            comparison = csv;
        else
            comparison += csv.substr(csv.find('\n') + 1); // table rows share one header
    }
    out.write("comparison.csv", comparison);

    json manifest;
    manifest["config_hash"] = fnv1a64_hex(config_text);
    manifest["config_text"] = config_text;
    manifest["instance_checksum"] = inst_checksum;
    manifest["seeds"] = {{"estimation", config.estimation_seed},
                         {"evaluation", config.eval_seed}};
    manifest["artifacts"] = json::object();
    for (const auto& [path, checksum] : out.checksums) manifest["artifacts"][path] = checksum;

    ExperimentArtifacts result;
    result.output_dir = out.root.string();
    result.manifest_text = manifest.dump(2) + "\n";
    write_text_file_atomic((out.root / "manifest.json").string(), result.manifest_text);
    result.checksums = std::move(out.checksums);
    return result;
}

std::string config_text_from_manifest(const std::string& manifest_text) {
    json doc;
    try {
        doc = json::parse(manifest_text);
    } catch (const json::parse_error& e) {
        throw FileError(std::string("invalid manifest JSON: ") + e.what());
    }
    if (!doc.contains("config_text") || !doc.at("config_text").is_string())
        throw SchemaError("config_text", "missing from manifest");
    return doc.at("config_text").get<std::string>();
}

} // namespace chargeopt
