#include "deto/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "deto/metrics.hpp"
#include "deto/rng.hpp"

namespace deto {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ------------------------------- formatting -------------------------------

std::string fmt17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

const char* effect_name(EffectSize::Category c) {
    switch (c) {
        case EffectSize::Category::Equal: return "equal";
        case EffectSize::Category::Small: return "small";
        case EffectSize::Category::Medium: return "medium";
        case EffectSize::Category::Large: return "large";
    }
    return "equal";
}

// ------------------------------- json helpers -----------------------------

[[noreturn]] void fail_field(const std::string& field, const std::string& why) {
    throw std::invalid_argument("config: field '" + field + "' " + why);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "' in "
                                        + where);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail_field(key, "has the wrong type");
    }
}

PeakShape parse_shape(const std::string& s) {
    if (s == "cone") return PeakShape::Cone;
    if (s == "gaussian") return PeakShape::Gaussian;
    fail_field("shape", "must be 'cone' or 'gaussian'");
}

AlgorithmKind parse_kind(const std::string& s) {
    if (s == "deto") return AlgorithmKind::DETO;
    if (s == "rbo") return AlgorithmKind::RBO;
    if (s == "cbo") return AlgorithmKind::CBO;
    fail_field("kind", "must be 'deto', 'rbo' or 'cbo'");
}

CoregKind parse_surrogate(const std::string& s) {
    if (s == "hmogp") return CoregKind::HMOGP;
    if (s == "lmc") return CoregKind::LMC;
    fail_field("surrogate", "must be 'hmogp' or 'lmc'");
}

SourcePolicy parse_policy(const std::string& s) {
    if (s == "adaptive") return SourcePolicy::Adaptive;
    if (s == "recent") return SourcePolicy::Recent;
    if (s == "similar") return SourcePolicy::Similar;
    if (s == "random") return SourcePolicy::Random;
    fail_field("source_policy", "must be one of adaptive/recent/similar/random");
}

AcqOptimizerMode parse_acq_mode(const std::string& s) {
    if (s == "hybrid") return AcqOptimizerMode::Hybrid;
    if (s == "de_only") return AcqOptimizerMode::DeOnly;
    if (s == "ascent_only") return AcqOptimizerMode::AscentOnly;
    fail_field("acq_optimizer", "must be one of hybrid/de_only/ascent_only");
}

std::string shape_name(PeakShape s) { return s == PeakShape::Cone ? "cone" : "gaussian"; }

std::string kind_name(AlgorithmKind k) {
    switch (k) {
        case AlgorithmKind::DETO: return "deto";
        case AlgorithmKind::RBO: return "rbo";
        case AlgorithmKind::CBO: return "cbo";
    }
    return "deto";
}

std::string policy_name(SourcePolicy p) {
    switch (p) {
        case SourcePolicy::Adaptive: return "adaptive";
        case SourcePolicy::Recent: return "recent";
        case SourcePolicy::Similar: return "similar";
        case SourcePolicy::Random: return "random";
    }
    return "adaptive";
}

std::string acq_mode_name(AcqOptimizerMode m) {
    switch (m) {
        case AcqOptimizerMode::Hybrid: return "hybrid";
        case AcqOptimizerMode::DeOnly: return "de_only";
        case AcqOptimizerMode::AscentOnly: return "ascent_only";
    }
    return "hybrid";
}

std::vector<ProblemSpec> parse_problems(const json& arr) {
    if (!arr.is_array() || arr.empty()) fail_field("problems", "must be a non-empty array");
    std::vector<ProblemSpec> out;
    for (const json& p : arr) {
        reject_unknown(p, {"id", "shape", "n", "peaks", "height_severity", "shift_severity",
                           "width_severity", "lower", "upper"},
                       "problems[]");
        if (!p.contains("n")) fail_field("n", "is required for each problem");
        std::vector<int> dims;
        if (p.at("n").is_array())
            for (const json& d : p.at("n")) dims.push_back(d.get<int>());
        else
            dims.push_back(p.at("n").get<int>());

        for (int n : dims) {
            if (n < 1) fail_field("n", "must be >= 1");
            ProblemSpec spec;
            spec.mpb.dim = n;
            spec.mpb.shape = parse_shape(get_or<std::string>(p, "shape", "cone"));
            spec.mpb.peaks = get_or<int>(p, "peaks", 5);
            if (spec.mpb.peaks < 1) fail_field("peaks", "must be >= 1");
            spec.mpb.height_severity = get_or<double>(p, "height_severity", 1.0);
            spec.mpb.shift_severity = get_or<double>(p, "shift_severity", 1.0);
            spec.mpb.width_severity = get_or<double>(p, "width_severity", 0.5);
            const double lo = get_or<double>(p, "lower", 0.0);
            const double hi = get_or<double>(p, "upper", 100.0);
            if (!(lo < hi)) fail_field("upper", "must exceed 'lower'");
            spec.mpb.bounds = Box::cube(n, lo, hi);
            std::string id = get_or<std::string>(p, "id", "");
            if (id.empty()) {
                std::ostringstream os;
                os << "mpb-" << shape_name(spec.mpb.shape) << "-n" << n << "-m"
                   << spec.mpb.peaks << "-h" << fmt6(spec.mpb.height_severity) << "-s"
                   << fmt6(spec.mpb.shift_severity);
                id = os.str();
            } else if (dims.size() > 1) {
                id += "-n" + std::to_string(n);
            }
            spec.id = id;
            out.push_back(std::move(spec));
        }
    }
    return out;
}

std::vector<AlgorithmSpec> parse_algorithms(const json& arr) {
    if (!arr.is_array() || arr.empty()) fail_field("algorithms", "must be a non-empty array");
    std::vector<AlgorithmSpec> out;
    for (const json& a : arr) {
        reject_unknown(a,
                       {"id", "kind", "surrogate", "lmc_rank", "source_policy", "init",
                        "source_count", "cbo_window", "acq_optimizer", "omega", "pop_size",
                        "generations", "de_weight", "crossover_rate", "kappa_init", "eps_d",
                        "ascent_iters", "sigma", "eps_l", "warm_max_iters",
                        "fit_multistarts", "fit_max_iters"},
                       "algorithms[]");
        AlgorithmSpec spec;
        spec.config.kind = parse_kind(get_or<std::string>(a, "kind", "deto"));
        spec.id = get_or<std::string>(a, "id", kind_name(spec.config.kind));
        spec.config.surrogate = parse_surrogate(get_or<std::string>(a, "surrogate", "hmogp"));
        spec.config.lmc_rank = get_or<int>(a, "lmc_rank", 0);
        if (spec.config.lmc_rank < 0) fail_field("lmc_rank", "must be >= 0");
        spec.config.source_policy =
            parse_policy(get_or<std::string>(a, "source_policy", "adaptive"));
        const std::string init = get_or<std::string>(a, "init", "warm");
        if (init != "warm" && init != "random")
            fail_field("init", "must be 'warm' or 'random'");
        spec.config.warm_init = init == "warm";
        spec.config.source_count = get_or<int>(a, "source_count", 3);
        if (spec.config.source_count < 1) fail_field("source_count", "must be >= 1");
        spec.config.cbo_window = get_or<int>(a, "cbo_window", 5);
        if (spec.config.cbo_window < 1) fail_field("cbo_window", "must be >= 1");

        spec.config.acq.mode = parse_acq_mode(get_or<std::string>(a, "acq_optimizer", "hybrid"));
        spec.config.acq.omega = get_or<double>(a, "omega", 1.5);
        spec.config.acq.pop_size = get_or<int>(a, "pop_size", 30);
        spec.config.acq.generations = get_or<int>(a, "generations", 50);
        if (spec.config.acq.generations < 0) fail_field("generations", "must be >= 0");
        spec.config.acq.de_weight = get_or<double>(a, "de_weight", 0.5);
        spec.config.acq.crossover_rate = get_or<double>(a, "crossover_rate", 0.9);
        spec.config.acq.kappa_init = get_or<int>(a, "kappa_init", 5);
        spec.config.acq.eps_d = get_or<double>(a, "eps_d", 0.01);
        spec.config.acq.ascent.max_iters = get_or<int>(a, "ascent_iters", 20);
        try {
            spec.config.acq.validate();
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(std::string("config: ") + e.what());
        }

        spec.config.warm.sigma = get_or<int>(a, "sigma", 5);
        if (spec.config.warm.sigma < 1) fail_field("sigma", "must be >= 1");
        spec.config.warm.eps_l = get_or<double>(a, "eps_l", 0.0);
        spec.config.warm.max_iters = get_or<int>(a, "warm_max_iters", 200);

        spec.config.fit.multistarts = get_or<int>(a, "fit_multistarts", 5);
        if (spec.config.fit.multistarts < 1) fail_field("fit_multistarts", "must be >= 1");
        spec.config.fit.max_iters = get_or<int>(a, "fit_max_iters", 200);
        if (spec.config.fit.max_iters < 1) fail_field("fit_max_iters", "must be >= 1");

        out.push_back(std::move(spec));
    }
    std::set<std::string> ids;
    for (const auto& s : out)
        if (!ids.insert(s.id).second)
            fail_field("id", "duplicates algorithm id '" + s.id + "'");
    return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }
    reject_unknown(root,
                   {"problems", "algorithms", "time_steps", "repetitions", "master_seed",
                    "output_dir", "parallelism", "baseline"},
                   "the top level");

    ExperimentConfig cfg;
    if (!root.contains("problems")) fail_field("problems", "is required");
    if (!root.contains("algorithms")) fail_field("algorithms", "is required");
    cfg.problems = parse_problems(root.at("problems"));
    cfg.algorithms = parse_algorithms(root.at("algorithms"));
    cfg.time_steps = get_or<int>(root, "time_steps", 10);
    if (cfg.time_steps < 1) fail_field("time_steps", "must be >= 1");
    cfg.repetitions = get_or<int>(root, "repetitions", 31);
    if (cfg.repetitions < 1) fail_field("repetitions", "must be >= 1");
    cfg.master_seed = get_or<std::uint64_t>(root, "master_seed", 1);
    cfg.output_dir = get_or<std::string>(root, "output_dir", "results");
    cfg.parallelism = get_or<int>(root, "parallelism", 0);
    if (cfg.parallelism < 0) fail_field("parallelism", "must be >= 0");
    cfg.baseline = get_or<std::string>(root, "baseline", "rbo");

    std::set<std::string> pids;
    for (const auto& p : cfg.problems)
        if (!pids.insert(p.id).second)
            fail_field("id", "duplicates problem id '" + p.id + "'");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    json root;
    root["time_steps"] = cfg.time_steps;
    root["repetitions"] = cfg.repetitions;
    root["master_seed"] = cfg.master_seed;
    root["output_dir"] = cfg.output_dir;
    root["parallelism"] = cfg.parallelism;
    root["baseline"] = cfg.baseline;
    root["problems"] = json::array();
    for (const auto& p : cfg.problems) {
        json j;
        j["id"] = p.id;
        j["shape"] = shape_name(p.mpb.shape);
        j["n"] = p.mpb.dim;
        j["peaks"] = p.mpb.peaks;
        j["height_severity"] = p.mpb.height_severity;
        j["shift_severity"] = p.mpb.shift_severity;
        j["width_severity"] = p.mpb.width_severity;
        j["lower"] = p.mpb.bounds.lower[0];
        j["upper"] = p.mpb.bounds.upper[0];
        root["problems"].push_back(std::move(j));
    }
    root["algorithms"] = json::array();
    for (const auto& a : cfg.algorithms) {
        json j;
        j["id"] = a.id;
        j["kind"] = kind_name(a.config.kind);
        j["surrogate"] = a.config.surrogate == CoregKind::HMOGP ? "hmogp" : "lmc";
        j["lmc_rank"] = a.config.lmc_rank;
        j["source_policy"] = policy_name(a.config.source_policy);
        j["init"] = a.config.warm_init ? "warm" : "random";
        j["source_count"] = a.config.source_count;
        j["cbo_window"] = a.config.cbo_window;
        j["acq_optimizer"] = acq_mode_name(a.config.acq.mode);
        j["omega"] = a.config.acq.omega;
        j["pop_size"] = a.config.acq.pop_size;
        j["generations"] = a.config.acq.generations;
        j["de_weight"] = a.config.acq.de_weight;
        j["crossover_rate"] = a.config.acq.crossover_rate;
        j["kappa_init"] = a.config.acq.kappa_init;
        j["eps_d"] = a.config.acq.eps_d;
        j["ascent_iters"] = a.config.acq.ascent.max_iters;
        j["sigma"] = a.config.warm.sigma;
        j["eps_l"] = a.config.warm.eps_l;
        j["warm_max_iters"] = a.config.warm.max_iters;
        j["fit_multistarts"] = a.config.fit.multistarts;
        j["fit_max_iters"] = a.config.fit.max_iters;
        root["algorithms"].push_back(std::move(j));
    }
    return root.dump(2) + "\n";
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_config: cannot write '" + path + "'");
    out << config_to_json_text(cfg);
}

// ------------------------------- record I/O -------------------------------

void write_run_record(const RunRecord& record, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_run_record: cannot write '" + path + "'");
    out << "# deto-run 1\n";
    out << "# problem " << record.problem_id << "\n";
    out << "# algorithm " << record.algorithm_id << "\n";
    out << "# repetition " << record.repetition << "\n";
    out << "# seed " << record.seed << "\n";
    out << "# instance_seed " << record.instance_seed << "\n";
    out << "# dim " << record.dim << "\n";
    out << "# steps " << record.steps.size() << "\n";
    for (const auto& s : record.steps) {
        out << "# step " << s.step << " fes " << s.evaluations() << " optimum "
            << fmt17(s.optimum_value) << " wall " << fmt6(s.wall_seconds) << " failures "
            << s.surrogate_failures << " opt_x";
        for (int d = 0; d < s.optimum_x.size(); ++d) out << " " << fmt17(s.optimum_x[d]);
        out << "\n";
    }
    out << "step,fe";
    for (int d = 0; d < record.dim; ++d) out << ",x" << (d + 1);
    out << ",y,best_y\n";
    for (const auto& s : record.steps) {
        for (int i = 0; i < s.evaluations(); ++i) {
            out << s.step << "," << (i + 1);
            for (int d = 0; d < record.dim; ++d) out << "," << fmt17(s.xs(i, d));
            out << "," << fmt17(s.ys[i]) << "," << fmt17(s.best_so_far[i]) << "\n";
        }
    }
}

RunRecord read_run_record(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_run_record: cannot open '" + path + "'");
    RunRecord rec;
    std::string line;
    std::map<int, StepRecord> steps;

    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            std::istringstream ls(line.substr(2));
            std::string key;
            ls >> key;
            if (key == "problem") ls >> rec.problem_id;
            else if (key == "algorithm") ls >> rec.algorithm_id;
            else if (key == "repetition") ls >> rec.repetition;
            else if (key == "seed") ls >> rec.seed;
            else if (key == "instance_seed") ls >> rec.instance_seed;
            else if (key == "dim") ls >> rec.dim;
            else if (key == "step") {
                StepRecord s;
                int fes = 0;
                std::string word;
                ls >> s.step >> word >> fes >> word >> s.optimum_value >> word
                    >> s.wall_seconds >> word >> s.surrogate_failures >> word;
                s.optimum_x.resize(rec.dim);
                for (int d = 0; d < rec.dim; ++d) ls >> s.optimum_x[d];
                s.xs.resize(0, rec.dim);
                steps[s.step] = std::move(s);
            }
            continue;
        }
        if (line.empty() || line.rfind("step,", 0) == 0) continue;

        std::istringstream ls(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(std::stod(cell));
        if (cells.size() != static_cast<size_t>(rec.dim) + 4)
            throw std::runtime_error("read_run_record: malformed row in '" + path + "'");
        StepRecord& s = steps[static_cast<int>(cells[0])];
        const int slot = s.evaluations();
        s.xs.conservativeResize(slot + 1, rec.dim);
        for (int d = 0; d < rec.dim; ++d) s.xs(slot, d) = cells[2 + d];
        s.ys.conservativeResize(slot + 1);
        s.ys[slot] = cells[2 + rec.dim];
        s.best_so_far.conservativeResize(slot + 1);
        s.best_so_far[slot] = cells[3 + rec.dim];
    }

    for (auto& [t, s] : steps) {
        if (s.evaluations() == 0)
            throw std::runtime_error("read_run_record: step without evaluations in '" + path
                                     + "'");
        int best = 0;
        s.ys.maxCoeff(&best);
        s.incumbent = s.xs.row(best).transpose();
        s.incumbent_value = s.ys[best];
        rec.steps.push_back(std::move(s));
    }
    return rec;
}

// ------------------------------- sweep ------------------------------------

namespace {

struct RunCoordinates {
    const ProblemSpec* problem;
    const AlgorithmSpec* algorithm;
    int repetition;
};

std::string record_filename(const std::string& problem, const std::string& algorithm,
                            int rep) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "rep%03d", rep);
    return problem + "__" + algorithm + "__" + buf + ".run.csv";
}

RunRecord execute_run(const ExperimentConfig& cfg, const RunCoordinates& rc) {
    const std::uint64_t instance_seed =
        derive_seed(cfg.master_seed, rc.problem->id, "instance", rc.repetition);
    const std::uint64_t seed =
        derive_seed(cfg.master_seed, rc.problem->id, rc.algorithm->id, rc.repetition);
    DynamicProblem problem(rc.problem->mpb, instance_seed);
    const BudgetSchedule schedule =
        BudgetSchedule::standard(rc.problem->mpb.dim, cfg.time_steps);
    Rng rng(seed);
    RunRecord rec = run(rc.algorithm->config, problem, schedule, rng);
    rec.problem_id = rc.problem->id;
    rec.algorithm_id = rc.algorithm->id;
    rec.repetition = rc.repetition;
    rec.seed = seed;
    rec.instance_seed = instance_seed;
    return rec;
}

// Records grouped as problem -> algorithm -> repetition.
using RecordMap = std::map<std::string, std::map<std::string, std::map<int, RunRecord>>>;

RecordMap load_records(const std::string& dir) {
    RecordMap out;
    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() == ".csv"
            && entry.path().filename().string().find(".run.csv") != std::string::npos)
            paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        RunRecord rec = read_run_record(p);
        out[rec.problem_id][rec.algorithm_id][rec.repetition] = std::move(rec);
    }
    if (out.empty())
        throw std::runtime_error("no run records found in '" + dir + "'");
    return out;
}

std::string summary_csv(const RecordMap& records) {
    std::ostringstream out;
    out << "problem,algorithm,rep,seed,eps_f,eps_t\n";
    for (const auto& [pid, algos] : records) {
        for (const auto& [aid, reps] : algos) {
            for (const auto& [rep, rec] : reps) {
                const MetricReport m = error_metrics(rec);
                out << pid << "," << aid << "," << rep << "," << rec.seed << ","
                    << fmt17(m.eps_f) << "," << fmt17(m.eps_t) << "\n";
            }
        }
    }
    return out.str();
}

std::string stats_csv(const RecordMap& records, const std::string& baseline) {
    std::ostringstream out;
    out << "problem,algorithm,runs,eps_f_median,eps_t_median,wilcoxon_p_eps_f,"
           "wilcoxon_p_eps_t,a12_eps_f,a12_eps_t,effect_eps_t,rho_c_mean,rho_t_median\n";
    for (const auto& [pid, algos] : records) {
        // rho_c needs every algorithm's record for the same repetition.
        std::map<std::string, std::vector<double>> rho_c_samples;
        std::set<int> common;
        bool first = true;
        for (const auto& [aid, reps] : algos) {
            std::set<int> mine;
            for (const auto& [rep, rec] : reps) mine.insert(rep);
            if (first) { common = mine; first = false; }
            else {
                std::set<int> inter;
                std::set_intersection(common.begin(), common.end(), mine.begin(), mine.end(),
                                      std::inserter(inter, inter.begin()));
                common = std::move(inter);
            }
        }
        for (int rep : common) {
            std::vector<const RunRecord*> group;
            std::vector<std::string> ids;
            for (const auto& [aid, reps] : algos) {
                group.push_back(&reps.at(rep));
                ids.push_back(aid);
            }
            const std::vector<double> rc = rho_c(group);
            for (size_t i = 0; i < ids.size(); ++i) rho_c_samples[ids[i]].push_back(rc[i]);
        }

        const bool have_baseline = algos.count(baseline) > 0;
        for (const auto& [aid, reps] : algos) {
            std::vector<double> eps_f, eps_t;
            for (const auto& [rep, rec] : reps) {
                const MetricReport m = error_metrics(rec);
                eps_f.push_back(m.eps_f);
                eps_t.push_back(m.eps_t);
            }
            out << pid << "," << aid << "," << reps.size() << "," << fmt17(median(eps_f))
                << "," << fmt17(median(eps_t));

            if (have_baseline) {
                const auto& base_reps = algos.at(baseline);
                std::vector<double> bf, bt, af, at, rts;
                for (const auto& [rep, rec] : reps) {
                    auto it = base_reps.find(rep);
                    if (it == base_reps.end()) continue;
                    const MetricReport mb = error_metrics(it->second);
                    const MetricReport ma = error_metrics(rec);
                    bf.push_back(mb.eps_f);
                    bt.push_back(mb.eps_t);
                    af.push_back(ma.eps_f);
                    at.push_back(ma.eps_t);
                    rts.push_back(rho_t(rec, it->second));
                }
                if (!at.empty()) {
                    const double pf = wilcoxon_signed_rank(af, bf);
                    const double pt = wilcoxon_signed_rank(at, bt);
                    // a12 is oriented as "probability this algorithm beats the
                    // baseline": losses are compared baseline > algorithm.
                    const EffectSize ef = a12(bf, af);
                    const EffectSize et = a12(bt, at);
                    out << "," << fmt17(pf) << "," << fmt17(pt) << "," << fmt17(ef.a12)
                        << "," << fmt17(et.a12) << "," << effect_name(et.category);
                } else {
                    out << ",,,,,";
                }
            } else {
                out << ",,,,,";
            }

            const auto rc_it = rho_c_samples.find(aid);
            out << ","
                << (rc_it != rho_c_samples.end() && !rc_it->second.empty()
                        ? fmt17(mean_of(rc_it->second))
                        : "");
            if (have_baseline) {
                std::vector<double> rts;
                const auto& base_reps = algos.at(baseline);
                for (const auto& [rep, rec] : reps)
                    if (base_reps.count(rep)) rts.push_back(rho_t(rec, base_reps.at(rep)));
                out << "," << (rts.empty() ? "" : fmt17(median(rts)));
            } else {
                out << ",";
            }
            out << "\n";
        }
    }
    return out.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    if (cfg.problems.empty() || cfg.algorithms.empty())
        throw std::invalid_argument("run_experiment: nothing to run");
    fs::create_directories(cfg.output_dir);
    save_config(cfg, (fs::path(cfg.output_dir) / "experiment.json").string());

    std::vector<RunCoordinates> tasks;
    for (const auto& p : cfg.problems)
        for (const auto& a : cfg.algorithms)
            for (int rep = 0; rep < cfg.repetitions; ++rep)
                tasks.push_back({&p, &a, rep});

    const int workers_wanted = cfg.parallelism > 0
                                   ? cfg.parallelism
                                   : static_cast<int>(std::thread::hardware_concurrency());
    const int workers =
        std::max(1, std::min<int>(workers_wanted, static_cast<int>(tasks.size())));

    std::atomic<size_t> next{0};
    std::mutex mu;
    std::vector<std::string> failures;
    std::atomic<int> completed{0};

    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const RunCoordinates& rc = tasks[i];
            try {
                const RunRecord rec = execute_run(cfg, rc);
                const fs::path path =
                    fs::path(cfg.output_dir)
                    / record_filename(rc.problem->id, rc.algorithm->id, rc.repetition);
                write_run_record(rec, path.string());
                ++completed;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                failures.push_back(rc.problem->id + " " + rc.algorithm->id + " rep "
                                   + std::to_string(rc.repetition) + ": " + e.what());
            }
        }
    };

    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::sort(failures.begin(), failures.end());
    if (!failures.empty()) {
        std::ofstream out(fs::path(cfg.output_dir) / "failures.txt");
        for (const auto& f : failures) out << f << "\n";
    }

    // Summaries are reductions over the persisted records; reading them back
    // keeps every reported number recomputable from the records alone.
    const RecordMap records = load_records(cfg.output_dir);
    {
        std::ofstream out(fs::path(cfg.output_dir) / "summary.csv");
        out << summary_csv(records);
    }
    {
        std::ofstream out(fs::path(cfg.output_dir) / "stats.csv");
        out << stats_csv(records, cfg.baseline);
    }

    ExperimentResult result;
    result.failures = static_cast<int>(failures.size());
    result.completed = completed.load();
    result.output_dir = cfg.output_dir;
    return result;
}

void write_report(const std::string& results_dir, std::ostream& out) {
    const RecordMap records = load_records(results_dir);
    std::string baseline = "rbo";
    const fs::path manifest = fs::path(results_dir) / "experiment.json";
    if (fs::exists(manifest)) {
        baseline = load_config(manifest.string()).baseline;
    }
    out << summary_csv(records) << "\n" << stats_csv(records, baseline);
}

std::string emit_plot_data(const std::string& results_dir, const std::string& kind) {
    const RecordMap records = load_records(results_dir);
    const fs::path path = fs::path(results_dir) / ("plot_" + kind + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_plot_data: cannot write '" + path.string() + "'");

    if (kind == "trajectory") {
        out << "problem,algorithm,step,fe,global_fe,mean_loss,band_lo,band_hi\n";
        for (const auto& [pid, algos] : records) {
            for (const auto& [aid, reps] : algos) {
                std::vector<MetricReport> ms;
                for (const auto& [rep, rec] : reps) ms.push_back(error_metrics(rec));
                const auto& shape = ms.front().loss_traj;
                int global_fe = 0;
                for (size_t s = 0; s < shape.size(); ++s) {
                    for (size_t i = 0; i < shape[s].size(); ++i) {
                        ++global_fe;
                        std::vector<double> losses;
                        for (const auto& m : ms) losses.push_back(m.loss_traj[s][i]);
                        const double mu = mean_of(losses);
                        const double half =
                            1.96 * sd_of(losses) / std::sqrt(static_cast<double>(losses.size()));
                        out << pid << "," << aid << "," << (s + 1) << "," << (i + 1) << ","
                            << global_fe << "," << fmt17(mu) << "," << fmt17(mu - half) << ","
                            << fmt17(mu + half) << "\n";
                    }
                }
            }
        }
    } else if (kind == "bars") {
        out << "problem,algorithm,eps_f_mean,eps_f_std,eps_t_mean,eps_t_std\n";
        for (const auto& [pid, algos] : records) {
            for (const auto& [aid, reps] : algos) {
                std::vector<double> eps_f, eps_t;
                for (const auto& [rep, rec] : reps) {
                    const MetricReport m = error_metrics(rec);
                    eps_f.push_back(m.eps_f);
                    eps_t.push_back(m.eps_t);
                }
                out << pid << "," << aid << "," << fmt17(mean_of(eps_f)) << ","
                    << fmt17(sd_of(eps_f)) << "," << fmt17(mean_of(eps_t)) << ","
                    << fmt17(sd_of(eps_t)) << "\n";
            }
        }
    } else if (kind == "rho") {
        std::string baseline = "rbo";
        const fs::path manifest = fs::path(results_dir) / "experiment.json";
        if (fs::exists(manifest)) baseline = load_config(manifest.string()).baseline;
        std::istringstream stats(stats_csv(records, baseline));
        out << "problem,algorithm,rho_c_mean,rho_t_median\n";
        std::string line;
        std::getline(stats, line);  // header
        while (std::getline(stats, line)) {
            std::vector<std::string> cells;
            std::istringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) cells.push_back(cell);
            while (cells.size() < 12) cells.push_back("");
            out << cells[0] << "," << cells[1] << "," << cells[10] << "," << cells[11]
                << "\n";
        }
    } else {
        throw std::invalid_argument("emit_plot_data: kind must be trajectory, bars or rho");
    }
    return path.string();
}

}  // namespace deto
