// experiment runner: data preparation, scenario training, privacy attacks,
// benchmarking, and report aggregation
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "scol/attacks.hpp"
#include "scol/datasets.hpp"
#include "scol/protocols.hpp"

using namespace scol;
namespace fs = std::filesystem;

namespace {

struct ExperimentConfig {
    std::string dataset = "mnist";  // mnist | synthetic | fraud
    std::string out_dir = "out";
    std::vector<u64> seeds = {1};
    double scale = 1.0;
    bool scale_set = false;
    std::uint32_t synth_features = 50;
    int synth_classes = 10;

    std::string method = "ctfe";  // or comma list for attack/bench
    double share_fraction = 0.3;
    bool secure = false;
    bool mixed_batches = false;
    TrainConfig train;  // lr 0.1, l2 0.0002, 10 epochs, batch 32
    ModelConfig model;

    std::size_t attack_train = 500;
    std::size_t attack_eval = 500;
    AttackConfig attack;
};

void apply_kv(ExperimentConfig& c, const std::string& key, const std::string& val) {
    auto b = [&] { return val == "1" || val == "true" || val == "on"; };
    if (key == "dataset") c.dataset = val;
    else if (key == "out") c.out_dir = val;
    else if (key == "method") c.method = val;
    else if (key == "share_fraction") c.share_fraction = std::stod(val);
    else if (key == "secure") c.secure = b();
    else if (key == "mixed_batches") c.mixed_batches = b();
    else if (key == "lr") c.train.lr = std::stod(val);
    else if (key == "l2") c.train.l2 = std::stod(val);
    else if (key == "epochs") c.train.epochs = std::stoi(val);
    else if (key == "batch_size") c.train.batch_size = std::stoul(val);
    else if (key == "scale") { c.scale = std::stod(val); c.scale_set = true; }
    else if (key == "synth_features") c.synth_features = static_cast<std::uint32_t>(std::stoul(val));
    else if (key == "synth_classes") c.synth_classes = std::stoi(val);
    else if (key == "attack_train") c.attack_train = std::stoul(val);
    else if (key == "attack_eval") c.attack_eval = std::stoul(val);
    else if (key == "attack_epochs") c.attack.epochs = std::stoi(val);
    else if (key == "attack_lr") c.attack.lr = std::stod(val);
    else if (key == "seeds") {
        c.seeds.clear();
        std::stringstream ss(val);
        std::string tok;
        while (std::getline(ss, tok, ',')) c.seeds.push_back(std::stoull(tok));
    } else {
        throw FormatError("unknown config key: " + key);
    }
}

void load_config_file(ExperimentConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config file: " + path);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            std::size_t e = s.find_last_not_of(" \t\r");
            s.erase(e == std::string::npos ? 0 : e + 1);
            return s;
        };
        apply_kv(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::vector<Method> methods_of(const ExperimentConfig& c) {
    std::vector<Method> out;
    std::stringstream ss(c.method);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_method(tok));
    return out;
}

std::size_t scaled(std::size_t n, double s) {
    return static_cast<std::size_t>(std::llround(static_cast<double>(n) * s));
}

struct Prepared {
    FourWaySplit splits;
    int classes = 10;
    std::uint32_t width = 0;
};

Prepared prepare_data(const ExperimentConfig& c, u64 seed) {
    Prepared p;
    double s = c.scale;
    if (c.dataset == "mnist") {
        std::string dir = mnist_dir();
        LabeledDataset train = load_mnist_idx(dir + "/train-images-idx3-ubyte",
                                              dir + "/train-labels-idx1-ubyte");
        LabeledDataset test = load_mnist_idx(dir + "/t10k-images-idx3-ubyte",
                                             dir + "/t10k-labels-idx1-ubyte");
        standardize(train);
        standardize(test);
        SplitSpec spec = default_mnist_spec();
        spec.global_n = scaled(spec.global_n, s);
        spec.party1_n = scaled(spec.party1_n, s);
        spec.party2_n = scaled(spec.party2_n, s);
        spec.test_n = 0;
        p.splits = split(train, spec, seed);
        p.splits.test = select_share_subset(test, s, seed);
        p.classes = 10;
    } else if (c.dataset == "synthetic") {
        SplitSpec spec = default_mnist_spec(c.synth_classes);
        spec.global_n = scaled(2000, s);
        spec.party1_n = scaled(2000, s);
        spec.party2_n = scaled(2000, s);
        spec.test_n = scaled(2000, s);
        std::size_t total = spec.global_n + spec.party1_n + spec.party2_n + spec.test_n;
        LabeledDataset src = gen_synthetic(total + total / 4, c.synth_features, c.synth_classes,
                                           derive_seed(seed, 0xDA7A));
        p.splits = split(src, spec, seed);
        p.classes = c.synth_classes;
    } else if (c.dataset == "fraud") {
        p.splits = gen_fraud(seed);
        p.classes = 2;
    } else {
        throw FormatError("unknown dataset: " + c.dataset);
    }
    p.width = static_cast<std::uint32_t>(p.splits.party1.width());
    return p;
}

ModelConfig model_for(const ExperimentConfig& c, const Prepared& p) {
    ModelConfig m = c.model;
    m.layer_sizes = {p.width, 64, 64, 64, static_cast<std::uint32_t>(p.classes)};
    m.fe_layers = 3;
    m.q = 64;
    return m;
}

u64 config_hash(const std::string& canonical) {
    u64 h = 14695981039346656037ull;
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

std::string canonical_config(const ExperimentConfig& c) {
    std::ostringstream os;
    os << "dataset=" << c.dataset << "\nmethod=" << c.method
       << "\nshare_fraction=" << c.share_fraction << "\nsecure=" << c.secure
       << "\nmixed_batches=" << c.mixed_batches << "\nlr=" << c.train.lr << "\nl2=" << c.train.l2
       << "\nepochs=" << c.train.epochs << "\nbatch_size=" << c.train.batch_size
       << "\nscale=" << c.scale << "\nsynth_features=" << c.synth_features
       << "\nsynth_classes=" << c.synth_classes << "\nattack_train=" << c.attack_train
       << "\nattack_eval=" << c.attack_eval << "\nattack_epochs=" << c.attack.epochs
       << "\nattack_lr=" << c.attack.lr << "\nseeds=";
    for (std::size_t i = 0; i < c.seeds.size(); ++i) os << (i ? "," : "") << c.seeds[i];
    os << "\n";
    return os.str();
}

void write_manifest(const ExperimentConfig& c, const std::string& command) {
    fs::create_directories(c.out_dir);
    std::ofstream out(c.out_dir + "/manifest.txt");
    std::string canon = canonical_config(c);
    out << "command=" << command << "\nformat_version=1\nconfig_hash=" << config_hash(canon)
        << "\n" << canon;
}

std::ofstream open_csv(const std::string& path, const std::string& header) {
    bool fresh = !fs::exists(path);
    std::ofstream out(path, std::ios::app);
    if (fresh) out << header << "\n";
    return out;
}

void cmd_gen_data(const ExperimentConfig& c) {
    write_manifest(c, "gen-data");
    std::ofstream out(c.out_dir + "/splits.csv");
    out << "seed,partition,count,labels\n";
    for (u64 seed : c.seeds) {
        Prepared p = prepare_data(c, seed);
        struct Row {
            const char* name;
            const LabeledDataset* d;
        } rows[] = {{"global", &p.splits.global},
                    {"party1", &p.splits.party1},
                    {"party2", &p.splits.party2},
                    {"test", &p.splits.test}};
        for (auto& r : rows) {
            out << seed << "," << r.name << "," << r.d->size() << ",";
            auto h = r.d->label_histogram();
            for (std::size_t l = 0; l < h.size(); ++l) out << (l ? ";" : "") << h[l];
            out << "\n";
        }
    }
    std::printf("splits written to %s/splits.csv\n", c.out_dir.c_str());
}

void cmd_train(const ExperimentConfig& c) {
    write_manifest(c, "train");
    auto metrics = open_csv(c.out_dir + "/metrics.csv",
                            "method,seed,party,label,accuracy,precision,recall,f1");
    auto traffic = open_csv(c.out_dir + "/traffic.csv",
                            "method,seed,party,phase,bytes_out,bytes_in,rounds");
    auto timing = open_csv(c.out_dir + "/timing.csv", "method,seed,phase,seconds");
    for (u64 seed : c.seeds) {
        Prepared p = prepare_data(c, seed);
        for (Method m : methods_of(c)) {
            ScenarioConfig sc;
            sc.method = m;
            sc.share_fraction = c.share_fraction;
            sc.train = c.train;
            sc.model = model_for(c, p);
            sc.secure = c.secure;
            sc.mixed_batches = c.mixed_batches;
            sc.seed = seed;
            ScenarioResult r = run_scenario(sc, p.splits);
            for (auto& rec : r.metrics_records()) {
                char line[160];
                std::snprintf(line, sizeof line, "%s,%llu,%d,%d,%.4f,%.4f,%.4f,%.4f",
                              rec.method.c_str(), static_cast<unsigned long long>(seed),
                              rec.party, rec.label, rec.accuracy, rec.precision, rec.recall,
                              rec.f1);
                metrics << line << "\n";
            }
            for (std::size_t party = 0; party < r.party_traffic.size(); ++party)
                for (auto& [phase, st] : r.party_traffic[party].phases)
                    traffic << method_name(m) << "," << seed << "," << party + 1 << "," << phase
                            << "," << st.bytes_out << "," << st.bytes_in << "," << st.rounds
                            << "\n";
            for (auto& t : r.timings) {
                char line[128];
                std::snprintf(line, sizeof line, "%s,%llu,%s,%.3f", method_name(m).c_str(),
                              static_cast<unsigned long long>(seed), t.phase.c_str(), t.seconds);
                timing << line << "\n";
            }
            for (std::size_t party = 0; party < r.party_models.size(); ++party)
                save_model(c.out_dir + "/" + method_name(m) + "_s" + std::to_string(seed) + "_p" +
                               std::to_string(party + 1) + ".model",
                           r.party_models[party]);
            for (std::size_t party = 0; party < r.party_classifiers.size(); ++party)
                save_model(c.out_dir + "/" + method_name(m) + "_s" + std::to_string(seed) + "_p" +
                               std::to_string(party + 1) + "_cls.model",
                           r.party_classifiers[party]);
            std::printf("%s seed %llu done\n", method_name(m).c_str(),
                        static_cast<unsigned long long>(seed));
        }
    }
}

void cmd_attack(const ExperimentConfig& c) {
    write_manifest(c, "attack");
    auto roc = open_csv(c.out_dir + "/roc.csv", "method,seed,threshold,tpr,fpr");
    auto hist = open_csv(c.out_dir + "/hist.csv",
                         "method,seed,bin_low,bin_high,member_count,nonmember_count");
    auto auc = open_csv(c.out_dir + "/auc.csv", "method,seed,auc");
    for (Method m : methods_of(c)) {
        // a separate split per seed keeps the victim pools seed-dependent
        for (u64 seed : c.seeds) {
            Prepared p = prepare_data(c, seed);
            ScenarioConfig sc;
            sc.method = m;
            sc.train = c.train;
            sc.model = model_for(c, p);
            sc.secure = c.secure;
            sc.seed = seed;
            PrivacyOptions opt;
            opt.attack_train_per_class = c.attack_train;
            opt.attack_eval_per_class = c.attack_eval;
            opt.attack = c.attack;
            AttackReport r = run_privacy_experiment(sc, p.splits, {seed}, opt)[0];
            for (auto& pt : r.roc) {
                char line[128];
                std::snprintf(line, sizeof line, "%s,%llu,%.6f,%.6f,%.6f",
                              method_name(m).c_str(), static_cast<unsigned long long>(seed),
                              pt.threshold, pt.tpr, pt.fpr);
                roc << line << "\n";
            }
            for (int b = 0; b < 20; ++b) {
                char line[128];
                std::snprintf(line, sizeof line, "%s,%llu,%.2f,%.2f,%llu,%llu",
                              method_name(m).c_str(), static_cast<unsigned long long>(seed),
                              b * 0.05, (b + 1) * 0.05,
                              static_cast<unsigned long long>(r.member_hist[static_cast<std::size_t>(b)]),
                              static_cast<unsigned long long>(r.nonmember_hist[static_cast<std::size_t>(b)]));
                hist << line << "\n";
            }
            char line[96];
            std::snprintf(line, sizeof line, "%s,%llu,%.6f", method_name(m).c_str(),
                          static_cast<unsigned long long>(seed), r.auc);
            auc << line << "\n";
            std::printf("attack %s seed %llu auc %.4f\n", method_name(m).c_str(),
                        static_cast<unsigned long long>(seed), r.auc);
        }
    }
}

void cmd_bench(const ExperimentConfig& c) {
    write_manifest(c, "bench");
    auto bench = open_csv(c.out_dir + "/bench.csv",
                          "method,seed,secure_seconds,plain_seconds,ratio,secure_bytes");
    for (u64 seed : c.seeds) {
        Prepared p = prepare_data(c, seed);
        for (Method m : methods_of(c)) {
            ScenarioConfig sc;
            sc.method = m;
            sc.share_fraction = c.share_fraction;
            sc.train = c.train;
            sc.model = model_for(c, p);
            sc.mixed_batches = c.mixed_batches;
            sc.seed = seed;
            auto wall = [&](bool secure) {
                sc.secure = secure;
                double t0 = std::chrono::duration<double>(
                                std::chrono::steady_clock::now().time_since_epoch())
                                .count();
                ScenarioResult r = run_scenario(sc, p.splits);
                double t1 = std::chrono::duration<double>(
                                std::chrono::steady_clock::now().time_since_epoch())
                                .count();
                u64 bytes = 0;
                for (auto& t : r.party_traffic) bytes += t.total_bytes_out();
                return std::pair<double, u64>{t1 - t0, bytes};
            };
            auto [plain_s, plain_b] = wall(false);
            auto [secure_s, secure_b] = wall(true);
            char line[160];
            std::snprintf(line, sizeof line, "%s,%llu,%.3f,%.3f,%.3f,%llu",
                          method_name(m).c_str(), static_cast<unsigned long long>(seed), secure_s,
                          plain_s, plain_s > 0 ? secure_s / plain_s : 0.0,
                          static_cast<unsigned long long>(secure_b));
            bench << line << "\n";
            std::printf("bench %s: secure %.3fs plain %.3fs\n", method_name(m).c_str(), secure_s,
                        plain_s);
        }
    }
}

void cmd_report(const std::string& dir) {
    std::ifstream in(dir + "/metrics.csv");
    if (!in) throw FormatError("no metrics.csv under " + dir);
    std::string line;
    std::getline(in, line);  // header
    struct Acc {
        double sum = 0, sq = 0;
        int n = 0;
    };
    std::map<std::string, std::array<Acc, 4>> agg;  // method,party,label -> A/P/R/F1
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string method, seed, party, label;
        std::getline(ss, method, ',');
        std::getline(ss, seed, ',');
        std::getline(ss, party, ',');
        std::getline(ss, label, ',');
        std::string key = method + "," + party + "," + label;
        for (int i = 0; i < 4; ++i) {
            std::string v;
            std::getline(ss, v, ',');
            double x = std::stod(v);
            agg[key][static_cast<std::size_t>(i)].sum += x;
            agg[key][static_cast<std::size_t>(i)].sq += x * x;
            agg[key][static_cast<std::size_t>(i)].n += 1;
        }
    }
    std::ofstream out(dir + "/summary.csv");
    out << "method,party,label,accuracy_mean,accuracy_std,precision_mean,precision_std,"
           "recall_mean,recall_std,f1_mean,f1_std\n";
    for (auto& [key, accs] : agg) {
        out << key;
        for (auto& a : accs) {
            double mean = a.sum / a.n;
            double var = std::max(0.0, a.sq / a.n - mean * mean);
            char buf[48];
            std::snprintf(buf, sizeof buf, ",%.4f,%.4f", mean, std::sqrt(var));
            out << buf;
        }
        out << "\n";
    }
    std::printf("summary written to %s/summary.csv\n", dir.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-party private collaborative learning experiments"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string config_file, seeds_arg, report_dir;
    double scale_arg = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_file, "key=value config file");
        sub->add_option("--dataset", cfg.dataset, "mnist | synthetic | fraud");
        sub->add_option("--out", cfg.out_dir, "output directory");
        sub->add_option("--seeds", seeds_arg, "comma-separated seeds");
        sub->add_option("--scale", scale_arg, "uniform split-size scale");
        sub->add_option("--method", cfg.method, "nc | ctfe | sfe | ltfe (comma list ok)");
        sub->add_option("--share-fraction", cfg.share_fraction);
        sub->add_flag("--secure", cfg.secure, "run exchange phases under MPC");
        sub->add_flag("--mixed-batches", cfg.mixed_batches);
        sub->add_option("--epochs", cfg.train.epochs);
        sub->add_option("--batch-size", cfg.train.batch_size);
        sub->add_option("--lr", cfg.train.lr);
        sub->add_option("--l2", cfg.train.l2);
        sub->add_option("--attack-train", cfg.attack_train);
        sub->add_option("--attack-eval", cfg.attack_eval);
        sub->add_option("--attack-epochs", cfg.attack.epochs);
    };
    CLI::App* gen = app.add_subcommand("gen-data", "materialize splits and write manifests");
    CLI::App* train = app.add_subcommand("train", "run training scenarios");
    CLI::App* attack = app.add_subcommand("attack", "membership-inference evaluation");
    CLI::App* bench = app.add_subcommand("bench", "secure vs plaintext timing");
    for (CLI::App* sub : {gen, train, attack, bench}) add_common(sub);
    CLI::App* report = app.add_subcommand("report", "aggregate multi-seed metrics");
    report->add_option("dir", report_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        // file first, then flags override whatever they set
        if (!config_file.empty()) {
            ExperimentConfig file_cfg;
            load_config_file(file_cfg, config_file);
            ExperimentConfig flags = cfg;
            cfg = file_cfg;
            // re-apply explicitly passed flags
            CLI::App* sub = app.get_subcommands().front();
            auto seen = [&](const std::string& name) {
                auto* opt = sub->get_option_no_throw(name);
                return opt != nullptr && opt->count() > 0;
            };
            if (seen("--dataset")) cfg.dataset = flags.dataset;
            if (seen("--out")) cfg.out_dir = flags.out_dir;
            if (seen("--method")) cfg.method = flags.method;
            if (seen("--share-fraction")) cfg.share_fraction = flags.share_fraction;
            if (seen("--secure")) cfg.secure = flags.secure;
            if (seen("--mixed-batches")) cfg.mixed_batches = flags.mixed_batches;
            if (seen("--epochs")) cfg.train.epochs = flags.train.epochs;
            if (seen("--batch-size")) cfg.train.batch_size = flags.train.batch_size;
            if (seen("--lr")) cfg.train.lr = flags.train.lr;
            if (seen("--l2")) cfg.train.l2 = flags.train.l2;
            if (seen("--attack-train")) cfg.attack_train = flags.attack_train;
            if (seen("--attack-eval")) cfg.attack_eval = flags.attack_eval;
            if (seen("--attack-epochs")) cfg.attack.epochs = flags.attack.epochs;
        }
        if (!seeds_arg.empty()) apply_kv(cfg, "seeds", seeds_arg);
        if (scale_arg >= 0) {
            cfg.scale = scale_arg;
            cfg.scale_set = true;
        }
        if (cfg.secure && !cfg.scale_set) cfg.scale = 0.1;  // secure full scale takes hours

        if (gen->parsed()) cmd_gen_data(cfg);
        else if (train->parsed()) cmd_train(cfg);
        else if (attack->parsed()) cmd_attack(cfg);
        else if (bench->parsed()) cmd_bench(cfg);
        else if (report->parsed()) cmd_report(report_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
