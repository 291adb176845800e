// End-to-end acceptance gate: one pass/fail line per criterion. Run with no
// arguments for the full gate, or pass criterion numbers to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "scol/attacks.hpp"
#include "scol/datasets.hpp"
#include "scol/dealer.hpp"
#include "scol/mpc.hpp"
#include "scol/protocols.hpp"
#include "scol/secure_nn.hpp"
#include "test_util.hpp"

using namespace scol;

namespace {

double now_s() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

struct Rig {
    FixedPointCodec codec;
    Dealer dealer;
    OnDemandPool pool;
    InProcNet net;
    SecureSession s;

    explicit Rig(u64 seed)
        : codec(),
          dealer(2, codec, seed),
          pool(dealer, RandomnessBudget{}, /*enforce=*/false),
          net(2),
          s(2, codec, &pool, &net, seed ^ 0x5eedull) {}
};

Tensor randt(std::vector<std::uint32_t> shape, u64 seed, double lo, double hi) {
    Tensor t(std::move(shape));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    for (auto& v : t.data) v = dist(rng);
    return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::fabs(a.data[i] - b.data[i]));
    return m;
}

i64 floor_div(i64 num, i64 den) {
    i64 q = num / den;
    if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
    return q;
}

struct Outcome {
    bool ok = true;
    std::ostringstream detail;
};

void require(Outcome& o, bool cond, const std::string& what) {
    if (!cond) {
        o.ok = false;
        o.detail << " [FAIL: " << what << "]";
    }
}

// ---------------------------------------------------------------- criterion 1

Outcome codec_round_trip() {
    Outcome o;
    FixedPointCodec codec;
    const double ulp = 1.0 / static_cast<double>(codec.scale);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> dist(-100.0, 100.0);
    double worst = 0;
    for (int i = 0; i < 100000; ++i) {
        double x = dist(rng);
        worst = std::max(worst, std::fabs(codec.decode(codec.encode(x)) - x));
    }
    require(o, worst <= 0.5 * ulp + 1e-12, "round-trip error over 0.5 ulp");
    o.detail << "worst round-trip " << worst;

    require(o, codec.encode(0.0) == 0, "encode(0) != 0");
    for (double x : {1e-5, 2.34567, 99.99999, 0.000005, 100.0}) {
        require(o, codec.encode(-x) == ring_neg(codec.encode(x)), "sign symmetry");
        // wrap: masking with an arbitrary ring element and unmasking is exact
        RingElement e = codec.encode(x), a = rng();
        require(o, ring_add(a, ring_sub(e, a)) == e, "mask/unmask wrap");
    }
    require(o, codec.decode(codec.encode(0.000005)) == 1e-5, "half-ulp rounds away from zero");
    bool threw = false;
    try {
        codec.encode(codec.max_magnitude * 2);
    } catch (const RangeError&) {
        threw = true;
    }
    require(o, threw, "out-of-range encode must throw");
    return o;
}

// ---------------------------------------------------------------- criterion 2

Outcome mpc_op_correctness() {
    Outcome o;
    Rig r(21);
    const double ulp = 1.0 / static_cast<double>(r.codec.scale);
    auto quantize = [&](Tensor t) {
        for (auto& v : t.data) v = r.codec.decode(r.codec.encode(v));
        return t;
    };

    double worst_mul = 0;
    for (u64 rep = 0; rep < 5; ++rep) {  // 5 x 2000 elementwise instances
        Tensor x = quantize(randt({2000}, 100 + rep, -8, 8));
        Tensor y = quantize(randt({2000}, 200 + rep, -8, 8));
        Tensor z = reconstruct(r.s, mul_fixed(r.s, share(r.s, x), share(r.s, y)));
        for (std::size_t i = 0; i < z.data.size(); ++i)
            worst_mul = std::max(worst_mul, std::fabs(z.data[i] - x.data[i] * y.data[i]));
    }
    require(o, worst_mul <= ulp + 1e-12, "mul over 1/scale");

    double worst_mm = 0;
    const std::uint32_t k = 20;
    for (u64 rep = 0; rep < 20; ++rep) {  // 20 x 500 output elements
        Tensor x = quantize(randt({25, k}, 300 + rep, -8, 8));
        Tensor y = quantize(randt({k, 20}, 400 + rep, -8, 8));
        Tensor z = reconstruct(r.s, matmul_fixed(r.s, share(r.s, x), share(r.s, y)));
        for (std::uint32_t i = 0; i < 25; ++i)
            for (std::uint32_t j = 0; j < 20; ++j) {
                double acc = 0;
                for (std::uint32_t t = 0; t < k; ++t) acc += x.at(i, t) * y.at(t, j);
                worst_mm = std::max(worst_mm, std::fabs(z.at(i, j) - acc));
            }
    }
    require(o, worst_mm <= (k + 1) * ulp, "matmul over (k+1)/scale");

    // truncate: exact floor division of the signed scale-2 value
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<i64> prod(-800000, 800000);
    bool trunc_ok = true, msb_ok = true, relu_ok = true, semi_ok = true;
    for (u64 rep = 0; rep < 5; ++rep) {
        std::vector<RingElement> v2(2000);
        std::vector<i64> truth(2000);
        for (std::size_t i = 0; i < v2.size(); ++i) {
            i64 a = prod(rng), b = prod(rng);
            truth[i] = a * b;  // |a*b| <= 6.4e11 < 2^63
            v2[i] = ring_from_signed(truth[i]);
        }
        SharedTensor sh = share_ring(r.s, v2, {2000}, 2);
        TruncationPair pair = r.pool.take_trunc(2000);
        auto out = reconstruct_ring(truncate(r.s, sh, pair));
        for (std::size_t i = 0; i < out.size(); ++i)
            trunc_ok &= ring_to_signed(out[i]) ==
                        floor_div(truth[i], static_cast<i64>(r.codec.scale));

        SharedTensor se = share_ring(r.s, v2, {2000}, 1);
        ComparisonTuple ct = r.pool.take_cmp(2000);
        auto bits = reconstruct_ring(msb(r.s, se, ct));
        for (std::size_t i = 0; i < bits.size(); ++i)
            msb_ok &= bits[i] == (truth[i] < 0 ? 1u : 0u);

        auto rl = reconstruct_ring(relu(r.s, se));
        for (std::size_t i = 0; i < rl.size(); ++i)
            relu_ok &= ring_to_signed(rl[i]) == std::max<i64>(0, truth[i]);

        auto sg = reconstruct_ring(semi_sigmoid(r.s, se));
        i64 one = static_cast<i64>(r.codec.scale);
        for (std::size_t i = 0; i < sg.size(); ++i)
            semi_ok &= ring_to_signed(sg[i]) == std::clamp(truth[i], i64{0}, one);
    }
    require(o, trunc_ok, "truncate not exact floor");
    require(o, msb_ok, "msb not exact");
    require(o, relu_ok, "relu not exact");
    require(o, semi_ok, "semi_sigmoid not exact");

    // concat: linear, exact
    Tensor a = quantize(randt({50, 100}, 900, -8, 8));
    Tensor b = quantize(randt({50, 100}, 901, -8, 8));
    SharedTensor sa = share(r.s, a), sb = share(r.s, b);
    Tensor cat = reconstruct(r.s, concat_shared({&sa, &sb}, 1));
    bool cat_ok = cat.cols() == 200;
    for (std::uint32_t i = 0; i < 50 && cat_ok; ++i)
        for (std::uint32_t j = 0; j < 100; ++j)
            cat_ok &= cat.at(i, j) == a.at(i, j) && cat.at(i, j + 100) == b.at(i, j);
    require(o, cat_ok, "concat mismatch");

    o.detail << "worst mul " << worst_mul << ", worst matmul " << worst_mm;
    return o;
}

// ---------------------------------------------------------------- criterion 3

Outcome masking_uniformity() {
    Outcome o;
    Rig r(31);
    Tensor x = randt({2000}, 77, -8, 8);
    std::vector<u64> opened;
    opened.reserve(100000);
    for (int rep = 0; rep < 50; ++rep) {
        SharedTensor sx = share(r.s, x);
        BeaverTriple t = r.pool.take_beaver(2000);
        // exactly what crosses the wire during a Beaver multiply
        for (u64 v : open(r.s, sub_shared(sx, t.a))) opened.push_back(v);
    }
    double chi2 = testutil::chi_square_top8(opened);
    require(o, chi2 < testutil::kChi2Crit255, "chi-square over the p=0.01 critical value");
    o.detail << "chi2 " << chi2 << " over " << opened.size() << " openings (crit "
             << testutil::kChi2Crit255 << ")";
    return o;
}

// ---------------------------------------------------------------- criterion 4

Outcome backend_equivalence() {
    Outcome o;
    ModelConfig cfg;  // 784-64-64-64-10
    Model m = init_weights(cfg, 41);
    Tensor x = randt({32, 784}, 42, 0.0, 1.0);
    std::vector<int> labels;
    for (int i = 0; i < 32; ++i) labels.push_back(i % 10);
    Tensor y = one_hot(labels, 10);

    Rig r(43);
    SecureModel sm = share_model(r.s, m);
    Tensor secure_out = reconstruct(r.s, secure_forward(r.s, sm, share(r.s, x)).output);
    double fwd = max_abs_diff(secure_out, forward(m, x).output);
    require(o, fwd <= 1e-3, "secure forward over 1e-3");

    TrainConfig tc;
    secure_train_batch(r.s, sm, share(r.s, x), share(r.s, y), tc);
    Model secure_after = reveal_model(r.s, sm);
    sgd_step(m, backward(m, forward(m, x), y), tc);
    double step = 0;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        step = std::max(step, max_abs_diff(secure_after.layers[l].W, m.layers[l].W));
        step = std::max(step, max_abs_diff(secure_after.layers[l].b, m.layers[l].b));
    }
    require(o, step <= 1e-2, "secure SGD step over 1e-2");
    o.detail << "forward max-abs " << fwd << ", step max-abs " << step;
    return o;
}

// ---------------------------------------------------------------- criterion 5

Outcome gradient_check() {
    Outcome o;
    ModelConfig cfg;
    cfg.layer_sizes = {4, 3, 2};
    cfg.fe_layers = 1;
    cfg.q = 3;

    // pick a seed whose pre-activations sit away from the relu/clamp kinks
    Model m;
    Tensor x;
    Tensor y = one_hot({0, 1, 0, 1, 1, 0}, 2);
    for (u64 seed = 50;; ++seed) {
        m = init_weights(cfg, seed);
        for (auto& l : m.layers)
            for (auto& v : l.W.data) v *= 3.0;  // spread pre-activations out
        x = randt({6, 4}, seed + 1, -1, 1);
        ForwardCache fc = forward(m, x);
        double margin = 1.0;
        for (double z : fc.preacts[0].data) margin = std::min(margin, std::fabs(z));
        for (double z : fc.preacts[1].data)
            margin = std::min(margin, std::min(std::fabs(z), std::fabs(z - 1.0)));
        if (margin > 0.05) break;
    }

    Gradients g = backward(m, forward(m, x), y);
    const double h = 1e-4;
    double worst = 0;
    int params = 0;
    for (std::size_t l = 0; l < m.layers.size(); ++l) {
        auto check = [&](Tensor& theta, const Tensor& grad) {
            for (std::size_t i = 0; i < theta.data.size(); ++i) {
                double keep = theta.data[i];
                theta.data[i] = keep + h;
                double lp = mse_loss(forward(m, x).output, y);
                theta.data[i] = keep - h;
                double lm = mse_loss(forward(m, x).output, y);
                theta.data[i] = keep;
                double num = (lp - lm) / (2 * h);
                double rel = std::fabs(grad.data[i] - num) /
                             std::max({1.0, std::fabs(grad.data[i]), std::fabs(num)});
                worst = std::max(worst, rel);
                ++params;
            }
        };
        check(m.layers[l].W, g.dW[l]);
        check(m.layers[l].b, g.db[l]);
    }
    require(o, worst <= 1e-4, "finite-difference mismatch over 1e-4");
    o.detail << params << " params, worst relative error " << worst;
    return o;
}

// ---------------------------------------------------------------- criterion 6

Outcome cooperation_benefit() {
    Outcome o;
    const std::vector<double> fractions = {0.0, 0.5, 1.0};
    std::vector<double> mean_f1(fractions.size(), 0.0);
    const std::vector<u64> seeds = {1, 2, 3, 4, 5};
    for (u64 seed : seeds) {
        SplitSpec spec = default_mnist_spec(10);  // 3:1 favored skew
        spec.global_n = spec.party1_n = spec.party2_n = spec.test_n = 2000;
        LabeledDataset src = gen_synthetic(10000, 50, 10, derive_seed(seed, 0xDA7A));
        FourWaySplit splits = split(src, spec, seed);

        ScenarioConfig cfg;
        cfg.method = Method::CTFE;
        cfg.model.layer_sizes = {50, 64, 64, 64, 10};
        cfg.seed = seed;
        auto points = sweep_share_fraction(cfg, splits, fractions);
        for (std::size_t i = 0; i < points.size(); ++i) {
            // party 1 is starved of the labels party 2 favors
            double f1 = 0;
            for (int label : {7, 8, 9})
                f1 += points[i].result.party_eval[0].per_label[static_cast<std::size_t>(label)].f1;
            mean_f1[i] += f1 / 3.0 / static_cast<double>(seeds.size());
        }
    }
    o.detail << "starved-label F1 at {0, 0.5, 1.0}: " << mean_f1[0] << ", " << mean_f1[1] << ", "
             << mean_f1[2];
    require(o, mean_f1[1] >= mean_f1[0] && mean_f1[2] >= mean_f1[1], "F1 not non-decreasing");
    require(o, mean_f1[2] - mean_f1[0] >= 5.0, "gain under 5 F1 points");
    return o;
}

// ---------------------------------------------------------------- criterion 7

FourWaySplit mnist_benchmark_split() {
    std::string dir = mnist_dir();
    LabeledDataset train =
        load_mnist_idx(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
    LabeledDataset test =
        load_mnist_idx(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
    standardize(train);
    standardize(test);

    // label-skew weights calibrated so party 1 is SEVEN-starved, party 2
    // SEVEN-rich, and the shared pool mildly starved
    SplitSpec spec;
    spec.global_n = 12600;
    spec.party1_n = 23700;
    spec.party2_n = 23700;
    spec.test_n = 0;
    const double hi = 12.0, mid = 4.0, lo = 1.1, glo = 0.48;
    spec.global_w.assign(10, 1.0);
    for (int k : {3, 4, 5}) spec.global_w[k] = 3.0;
    for (int k : {7, 8, 9}) spec.global_w[k] = glo;
    spec.party1_w.assign(10, mid);
    spec.party2_w.assign(10, mid);
    for (int k : {0, 1, 2}) {
        spec.party1_w[k] = hi;
        spec.party2_w[k] = lo;
    }
    for (int k : {7, 8, 9}) {
        spec.party1_w[k] = lo;
        spec.party2_w[k] = hi;
    }
    FourWaySplit splits = split(train, spec, 42);
    splits.test = test;
    return splits;
}

Outcome mnist_ladder() {
    Outcome o;
    FourWaySplit splits = mnist_benchmark_split();
    const struct {
        Method m;
        double anchor;
    } rows[] = {{Method::NC, 69.07},
                {Method::SFE, 69.92},
                {Method::CTFE, 84.67},
                {Method::LTFE, 88.33}};
    double f1[4] = {0, 0, 0, 0};
    for (int i = 0; i < 4; ++i) {
        ScenarioConfig cfg;
        cfg.method = rows[i].m;
        cfg.train.batch_size = 128;
        cfg.seed = 5;
        ScenarioResult r = run_scenario(cfg, splits);
        f1[i] = r.party_eval[0].per_label[7].f1;
        o.detail << method_name(rows[i].m) << " " << f1[i] << (i == 3 ? "" : ", ");
        require(o, std::fabs(f1[i] - rows[i].anchor) <= 5.0,
                method_name(rows[i].m) + " outside anchor band");
    }
    require(o, f1[0] < f1[1] && f1[1] < f1[2] && f1[2] < f1[3], "F1 ordering broken");
    return o;
}

// ---------------------------------------------------------------- criterion 8

Outcome privacy_ordering() {
    Outcome o;
    const std::vector<u64> seeds = {1, 2, 3, 4, 5};
    SplitSpec spec = default_mnist_spec(10);
    spec.global_n = spec.party1_n = spec.party2_n = spec.test_n = 2000;
    LabeledDataset src = gen_synthetic(10000, 50, 10, derive_seed(1, 0xDA7A));
    FourWaySplit splits = split(src, spec, 1);

    auto mean_auc = [&](Method m, int epochs) {
        ScenarioConfig cfg;
        cfg.method = m;
        cfg.model.layer_sizes = {50, 64, 64, 64, 10};
        cfg.train.epochs = epochs;
        double sum = 0;
        for (auto& rep : run_privacy_experiment(cfg, splits, seeds)) sum += rep.auc;
        return sum / static_cast<double>(seeds.size());
    };
    double ctfe = mean_auc(Method::CTFE, 10);
    double sfe = mean_auc(Method::SFE, 10);
    double ltfe = mean_auc(Method::LTFE, 10);
    double random_target = mean_auc(Method::CTFE, 0);
    o.detail << "AUC ctfe " << ctfe << ", sfe " << sfe << ", ltfe " << ltfe << ", random-target "
             << random_target;
    require(o, ctfe >= sfe && sfe >= ltfe, "AUC ordering broken");
    require(o, ctfe - ltfe >= 0.05, "ctfe-ltfe gap under 0.05");
    require(o, std::fabs(random_target - 0.5) <= 0.05, "random-target AUC off 0.5");
    return o;
}

// ---------------------------------------------------------------- criterion 9

Outcome cost_orderings() {
    Outcome o;
    std::string dir = mnist_dir();
    LabeledDataset train =
        load_mnist_idx(dir + "/train-images-idx3-ubyte", dir + "/train-labels-idx1-ubyte");
    LabeledDataset test =
        load_mnist_idx(dir + "/t10k-images-idx3-ubyte", dir + "/t10k-labels-idx1-ubyte");
    standardize(train);
    standardize(test);
    SplitSpec spec = default_mnist_spec();
    spec.global_n = 600;
    spec.party1_n = spec.party2_n = 400;  // 0.5 share fraction -> 200 shared samples
    spec.test_n = 0;
    FourWaySplit splits = split(train, spec, 9);
    splits.test = select_share_subset(test, 0.03, 9);

    u64 bytes[3] = {0, 0, 0};
    double secs[3] = {0, 0, 0};
    const Method methods[3] = {Method::SFE, Method::CTFE, Method::LTFE};
    for (int i = 0; i < 3; ++i) {
        ScenarioConfig cfg;
        cfg.method = methods[i];
        cfg.share_fraction = 0.5;
        cfg.train.epochs = 1;
        cfg.secure = true;
        cfg.seed = 9;
        double t0 = now_s();
        ScenarioResult r = run_scenario(cfg, splits);
        secs[i] = now_s() - t0;
        for (auto& t : r.party_traffic) bytes[i] += t.total_bytes_out();
        o.detail << method_name(methods[i]) << " " << bytes[i] / (1024.0 * 1024.0) << " MiB / "
                 << secs[i] << " s" << (i == 2 ? "" : ", ");
    }
    require(o, bytes[0] < bytes[1] && bytes[0] < bytes[2], "SFE not cheapest in bytes");
    require(o, secs[0] < secs[1] && secs[0] < secs[2], "SFE not cheapest in wall time");

    // symbolic cost formulas against hand-expanded multiply-accumulate counts
    ModelConfig fcn;  // 784-64-64-64-10: fe = 784*64 + 64*64 + 64*64, cls = 64*10
    const u64 fe = 784 * 64 + 64 * 64 + 64 * 64, cls = 64 * 10;
    const u64 n = 1000, p = 2, t = 10;
    require(o, estimate_cost(fcn, n, p, t, Method::NC) == 0, "NC cost not 0");
    require(o, estimate_cost(fcn, n, p, t, Method::CTFE) == n * p * t * (fe + cls), "CTFE cost");
    require(o, estimate_cost(fcn, n, p, t, Method::SFE) == n * p * t * cls, "SFE cost");
    require(o, estimate_cost(fcn, n, p, t, Method::LTFE) == n * p * t * (fe + (p + 1) * cls),
            "LTFE cost");
    return o;
}

// --------------------------------------------------------------- criterion 10

Outcome determinism() {
    Outcome o;
    SplitSpec spec = default_mnist_spec(10);
    spec.global_n = spec.party1_n = spec.party2_n = spec.test_n = 300;
    LabeledDataset src = gen_synthetic(1500, 30, 10, derive_seed(3, 0xDA7A));
    FourWaySplit splits = split(src, spec, 3);

    ScenarioConfig cfg;
    cfg.method = Method::CTFE;
    cfg.model.layer_sizes = {30, 64, 64, 64, 10};
    cfg.train.epochs = 2;
    cfg.seed = 3;

    auto metrics_blob = [&] {
        std::ostringstream os;
        for (auto& rec : run_scenario(cfg, splits).metrics_records()) {
            char line[160];
            std::snprintf(line, sizeof line, "%s,%d,%d,%.10f,%.10f,%.10f,%.10f\n",
                          rec.method.c_str(), rec.party, rec.label, rec.accuracy, rec.precision,
                          rec.recall, rec.f1);
            os << line;
        }
        return os.str();
    };
    std::string first = metrics_blob(), second = metrics_blob();
    require(o, !first.empty() && first == second, "plaintext metrics not byte-identical");

    cfg.secure = true;
    u64 h1 = run_scenario(cfg, splits).transcript_hash;
    u64 h2 = run_scenario(cfg, splits).transcript_hash;
    require(o, h1 == h2, "secure transcripts differ");
    o.detail << "metrics blob " << first.size() << " bytes, transcript hash " << std::hex << h1;
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    struct Criterion {
        int number;
        const char* title;
        double budget_s;
        Outcome (*run)();
    };
    const Criterion table[] = {
        {1, "fixed-point codec round-trip", 5, codec_round_trip},
        {2, "secure op correctness vs fixed-point oracle", 120, mpc_op_correctness},
        {3, "masking uniformity (chi-square, top 8 bits)", 60, masking_uniformity},
        {4, "secure vs plaintext backend equivalence", 600, backend_equivalence},
        {5, "analytic gradients vs finite differences", 10, gradient_check},
        {6, "cooperation benefit over share fractions", 900, cooperation_benefit},
        {7, "full-scale benchmark F1 ladder", 1800, mnist_ladder},
        {8, "membership-inference privacy ordering", 1800, privacy_ordering},
        {9, "secure cost and traffic orderings", 1800, cost_orderings},
        {10, "deterministic runs and transcripts", 300, determinism},
    };

    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.push_back(std::atoi(argv[i]));

    int failures = 0;
    for (const Criterion& c : table) {
        if (!wanted.empty() &&
            std::find(wanted.begin(), wanted.end(), c.number) == wanted.end())
            continue;
        double t0 = now_s();
        Outcome o = c.run();
        double secs = now_s() - t0;
        if (secs >= c.budget_s) {
            o.ok = false;
            o.detail << " [FAIL: over " << c.budget_s << " s budget]";
        }
        std::printf("criterion %2d (%s): %s  (%.1f s) %s\n", c.number, c.title,
                    o.ok ? "PASS" : "FAIL", secs, o.detail.str().c_str());
        std::fflush(stdout);
        failures += o.ok ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
