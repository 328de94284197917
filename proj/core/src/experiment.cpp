#include "srt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace srt {

namespace {

// Role keys for deriving per-repeat seeds from the configured bases.
enum : std::uint64_t { kRoleInit = 1, kRoleData = 2, kRoleAugment = 3, kRoleNoise = 4 };

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument(key + ": expected true/false, got '" + v + "'");
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const std::int64_t x = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": expected an integer, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const std::uint64_t x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": expected a non-negative integer, got '" + v + "'");
    }
}

double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument("");
        return x;
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": expected a number, got '" + v + "'");
    }
}

std::vector<std::string> split_commas(const std::string& v) {
    std::vector<std::string> parts;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
}

std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (v.empty()) return out;
    for (const std::string& p : split_commas(v)) out.push_back(parse_real(key, p));
    return out;
}

std::vector<std::uint64_t> parse_u64_list(const std::string& key, const std::string& v) {
    std::vector<std::uint64_t> out;
    for (const std::string& p : split_commas(v)) out.push_back(parse_u64(key, p));
    if (out.empty()) throw std::invalid_argument(key + ": expected at least one value");
    return out;
}

int parse_bounded_int(const std::string& key, const std::string& v, std::int64_t lo,
                      std::int64_t hi) {
    const std::int64_t x = parse_int(key, v);
    if (x < lo || x > hi) {
        throw std::invalid_argument(key + ": value " + v + " outside [" + std::to_string(lo) +
                                    ", " + std::to_string(hi) + "]");
    }
    return int(x);
}

double parse_bounded_real(const std::string& key, const std::string& v, double lo, double hi) {
    const double x = parse_real(key, v);
    if (!(x >= lo && x <= hi)) {
        throw std::invalid_argument(key + ": value " + v + " outside [" + std::to_string(lo) +
                                    ", " + std::to_string(hi) + "]");
    }
    return x;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string format_real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string join_reals(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += format_real(v[i]);
    }
    return out;
}

std::string join_u64s(const std::vector<std::uint64_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

ExperimentSpec mnist_base() {
    ExperimentSpec spec;
    spec.dataset = DatasetKind::mnist;
    spec.mnist_dir = "data/mnist";
    spec.train.num_cycles = 10;
    spec.train.cycle_epochs = 20;
    spec.train.ensemble_capacity = 2;
    spec.train.lambda = 0.9;
    spec.train.batch_size = 128;
    spec.train.eps_max = 1e-3;
    spec.train.eps_min = 0.0;
    spec.train.ramp_epochs = 10;
    spec.train.hidden_width = 256;
    spec.train.transform = TransformSpec::mnist();
    spec.repeat_seeds = {1, 2, 3, 4, 5};
    return spec;
}

ExperimentSpec blobs_base() {
    ExperimentSpec spec;
    spec.dataset = DatasetKind::blobs;
    spec.blobs = BlobsParams{};
    spec.blobs.per_class = 200;
    spec.blobs.pad_px = 2; // 4x4 signal inside an 8x8 frame
    spec.train.num_cycles = 12;
    spec.train.cycle_epochs = 5;
    spec.train.ensemble_capacity = 2;
    spec.train.lambda = 0.9;
    spec.train.batch_size = 64;
    spec.train.eps_max = 1e-3;
    spec.train.eps_min = 0.0;
    spec.train.ramp_epochs = 5;
    spec.train.hidden_width = 256;
    spec.train.transform.max_translate_px = 1;
    spec.train.transform.image_height = 8;
    spec.train.transform.image_width = 8;
    spec.train.transform.channels = 1;
    spec.repeat_seeds = {1, 2, 3, 4, 5};
    return spec;
}

void set_noise(ExperimentSpec& spec, NoiseKind kind, double rate) {
    spec.noise.kind = kind;
    spec.noise.rate = rate;
    spec.train.noise_rate = rate;
}

double population_std(const std::vector<double>& xs, double mean) {
    double sq = 0.0;
    for (double x : xs) sq += (x - mean) * (x - mean);
    return std::sqrt(sq / double(xs.size()));
}

} // namespace

std::vector<std::string> preset_names() {
    return {"mnist-sym20", "mnist-sym50", "mnist-sym80", "mnist-asym40", "blobs-sym40"};
}

ExperimentSpec preset_spec(const std::string& name) {
    if (name == "mnist-sym20") {
        ExperimentSpec s = mnist_base();
        set_noise(s, NoiseKind::symmetric, 20.0);
        return s;
    }
    if (name == "mnist-sym50") {
        ExperimentSpec s = mnist_base();
        set_noise(s, NoiseKind::symmetric, 50.0);
        return s;
    }
    if (name == "mnist-sym80") {
        ExperimentSpec s = mnist_base();
        set_noise(s, NoiseKind::symmetric, 80.0);
        return s;
    }
    if (name == "mnist-asym40") {
        ExperimentSpec s = mnist_base();
        set_noise(s, NoiseKind::asymmetric, 40.0);
        return s;
    }
    if (name == "blobs-sym40") {
        ExperimentSpec s = blobs_base();
        set_noise(s, NoiseKind::symmetric, 40.0);
        return s;
    }
    std::string known;
    for (const std::string& n : preset_names()) known += " " + n;
    throw std::invalid_argument("unknown preset '" + name + "'; known presets:" + known);
}

void apply_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
    if (key == "dataset") {
        if (value == "mnist") spec.dataset = DatasetKind::mnist;
        else if (value == "blobs") spec.dataset = DatasetKind::blobs;
        else throw std::invalid_argument("dataset: expected mnist or blobs, got '" + value + "'");
    } else if (key == "mnist_dir") {
        spec.mnist_dir = value;
    } else if (key == "blobs_classes") {
        spec.blobs.num_classes = parse_bounded_int(key, value, 2, 1000);
    } else if (key == "blobs_per_class") {
        spec.blobs.per_class = parse_bounded_int(key, value, 1, 10'000'000);
    } else if (key == "blobs_test_per_class") {
        spec.blobs.test_per_class = parse_bounded_int(key, value, 1, 10'000'000);
    } else if (key == "blobs_dim") {
        spec.blobs.dim = parse_bounded_int(key, value, 1, 1'000'000);
    } else if (key == "blobs_separation") {
        spec.blobs.separation = parse_bounded_real(key, value, 1e-9, 1e9);
    } else if (key == "blobs_seed") {
        spec.blobs.seed = parse_u64(key, value);
    } else if (key == "blobs_pad_px") {
        spec.blobs.pad_px = parse_bounded_int(key, value, 0, 1000);
    } else if (key == "noise_kind") {
        if (value == "symmetric") spec.noise.kind = NoiseKind::symmetric;
        else if (value == "asymmetric") spec.noise.kind = NoiseKind::asymmetric;
        else throw std::invalid_argument("noise_kind: expected symmetric or asymmetric, got '" +
                                         value + "'");
    } else if (key == "noise_rate") {
        const double r = parse_real(key, value);
        if (r < 0.0 || r >= 100.0) {
            throw std::invalid_argument("noise_rate: value " + value + " outside [0, 100)");
        }
        spec.noise.rate = r;
        spec.train.noise_rate = r;
    } else if (key == "keep_noise_rate") {
        const double r = parse_real(key, value);
        if (r < 0.0 || r >= 100.0) {
            throw std::invalid_argument("keep_noise_rate: value " + value + " outside [0, 100)");
        }
        spec.train.noise_rate = r;
    } else if (key == "noise_seed") {
        spec.noise.seed = parse_u64(key, value);
    } else if (key == "num_cycles") {
        spec.train.num_cycles = parse_bounded_int(key, value, 1, 1'000'000);
    } else if (key == "cycle_epochs") {
        spec.train.cycle_epochs = parse_bounded_int(key, value, 1, 1'000'000);
    } else if (key == "ensemble_capacity") {
        spec.train.ensemble_capacity = parse_bounded_int(key, value, 1, 1'000'000);
    } else if (key == "lambda") {
        spec.train.lambda = parse_bounded_real(key, value, 0.0, 1.0);
    } else if (key == "batch_size") {
        spec.train.batch_size = parse_bounded_int(key, value, 1, 100'000'000);
    } else if (key == "eps_max") {
        spec.train.eps_max = parse_real(key, value);
        if (spec.train.eps_max <= 0.0) throw std::invalid_argument("eps_max: must be > 0");
    } else if (key == "eps_min") {
        spec.train.eps_min = parse_real(key, value);
        if (spec.train.eps_min < 0.0) throw std::invalid_argument("eps_min: must be >= 0");
    } else if (key == "ramp_epochs") {
        spec.train.ramp_epochs = parse_bounded_int(key, value, 1, 1'000'000);
    } else if (key == "hidden_width") {
        spec.train.hidden_width = parse_bounded_int(key, value, 1, 100'000'000);
    } else if (key == "init_seed") {
        spec.train.init_seed = parse_u64(key, value);
    } else if (key == "data_seed") {
        spec.train.data_seed = parse_u64(key, value);
    } else if (key == "augment_seed") {
        spec.train.augment_seed = parse_u64(key, value);
    } else if (key == "warmup_filter_mode") {
        if (value == "none") spec.train.warmup_filter_mode = WarmupFilterMode::none;
        else if (value == "current_model")
            spec.train.warmup_filter_mode = WarmupFilterMode::current_model;
        else
            throw std::invalid_argument(
                "warmup_filter_mode: expected none or current_model, got '" + value + "'");
    } else if (key == "filter_enabled") {
        spec.train.filter_enabled = parse_bool(key, value);
    } else if (key == "use_js_train") {
        spec.train.use_js_train = parse_bool(key, value);
    } else if (key == "use_js_acq") {
        spec.train.use_js_acq = parse_bool(key, value);
    } else if (key == "use_snapshot_ensemble") {
        spec.train.use_snapshot_ensemble = parse_bool(key, value);
    } else if (key == "include_current_model") {
        spec.train.include_current_model = parse_bool(key, value);
    } else if (key == "warmup_constant_lr") {
        spec.train.warmup_constant_lr = parse_bool(key, value);
    } else if (key == "adam_beta1") {
        spec.train.adam.beta1 = parse_bounded_real(key, value, 0.0, 1.0);
    } else if (key == "adam_beta2") {
        spec.train.adam.beta2 = parse_bounded_real(key, value, 0.0, 1.0);
    } else if (key == "adam_eps") {
        spec.train.adam.eps = parse_real(key, value);
        if (spec.train.adam.eps <= 0.0) throw std::invalid_argument("adam_eps: must be > 0");
    } else if (key == "max_translate_px") {
        spec.train.transform.max_translate_px = parse_bounded_int(key, value, 0, 100'000);
    } else if (key == "horizontal_flip") {
        spec.train.transform.horizontal_flip = parse_bool(key, value);
    } else if (key == "normalize_mean") {
        spec.train.transform.normalize_mean = parse_real_list(key, value);
    } else if (key == "normalize_std") {
        spec.train.transform.normalize_std = parse_real_list(key, value);
        for (double s : spec.train.transform.normalize_std) {
            if (s <= 0.0) throw std::invalid_argument("normalize_std: entries must be > 0");
        }
    } else if (key == "image_height") {
        spec.train.transform.image_height = parse_bounded_int(key, value, 1, 1'000'000);
    } else if (key == "image_width") {
        spec.train.transform.image_width = parse_bounded_int(key, value, 1, 1'000'000);
    } else if (key == "channels") {
        spec.train.transform.channels = parse_bounded_int(key, value, 1, 1'000'000);
    } else if (key == "snapshot_dir") {
        spec.train.snapshot_dir = value;
    } else if (key == "score_dump_dir") {
        spec.train.score_dump_dir = value;
    } else if (key == "repeat_seeds") {
        spec.repeat_seeds = parse_u64_list(key, value);
    } else if (key == "output_dir") {
        if (value.empty()) throw std::invalid_argument("output_dir: must be non-empty");
        spec.output_dir = value;
    } else {
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
}

ExperimentSpec parse_config_file(const std::string& path, ExperimentSpec base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected key=value, got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": empty key");
        }
        apply_key(base, key, value);
    }
    return base;
}

std::string echo_config(const ExperimentSpec& spec) {
    std::ostringstream os;
    os << "dataset=" << (spec.dataset == DatasetKind::mnist ? "mnist" : "blobs") << '\n';
    os << "mnist_dir=" << spec.mnist_dir << '\n';
    os << "blobs_classes=" << spec.blobs.num_classes << '\n';
    os << "blobs_per_class=" << spec.blobs.per_class << '\n';
    os << "blobs_test_per_class=" << spec.blobs.test_per_class << '\n';
    os << "blobs_dim=" << spec.blobs.dim << '\n';
    os << "blobs_separation=" << format_real(spec.blobs.separation) << '\n';
    os << "blobs_seed=" << spec.blobs.seed << '\n';
    os << "blobs_pad_px=" << spec.blobs.pad_px << '\n';
    os << "noise_kind=" << (spec.noise.kind == NoiseKind::symmetric ? "symmetric" : "asymmetric")
       << '\n';
    os << "noise_rate=" << format_real(spec.noise.rate) << '\n';
    os << "keep_noise_rate=" << format_real(spec.train.noise_rate) << '\n';
    os << "noise_seed=" << spec.noise.seed << '\n';
    os << "num_cycles=" << spec.train.num_cycles << '\n';
    os << "cycle_epochs=" << spec.train.cycle_epochs << '\n';
    os << "ensemble_capacity=" << spec.train.ensemble_capacity << '\n';
    os << "lambda=" << format_real(spec.train.lambda) << '\n';
    os << "batch_size=" << spec.train.batch_size << '\n';
    os << "eps_max=" << format_real(spec.train.eps_max) << '\n';
    os << "eps_min=" << format_real(spec.train.eps_min) << '\n';
    os << "ramp_epochs=" << spec.train.ramp_epochs << '\n';
    os << "hidden_width=" << spec.train.hidden_width << '\n';
    os << "init_seed=" << spec.train.init_seed << '\n';
    os << "data_seed=" << spec.train.data_seed << '\n';
    os << "augment_seed=" << spec.train.augment_seed << '\n';
    os << "warmup_filter_mode="
       << (spec.train.warmup_filter_mode == WarmupFilterMode::none ? "none" : "current_model")
       << '\n';
    os << "filter_enabled=" << (spec.train.filter_enabled ? "true" : "false") << '\n';
    os << "use_js_train=" << (spec.train.use_js_train ? "true" : "false") << '\n';
    os << "use_js_acq=" << (spec.train.use_js_acq ? "true" : "false") << '\n';
    os << "use_snapshot_ensemble=" << (spec.train.use_snapshot_ensemble ? "true" : "false")
       << '\n';
    os << "include_current_model=" << (spec.train.include_current_model ? "true" : "false")
       << '\n';
    os << "warmup_constant_lr=" << (spec.train.warmup_constant_lr ? "true" : "false") << '\n';
    os << "adam_beta1=" << format_real(spec.train.adam.beta1) << '\n';
    os << "adam_beta2=" << format_real(spec.train.adam.beta2) << '\n';
    os << "adam_eps=" << format_real(spec.train.adam.eps) << '\n';
    os << "max_translate_px=" << spec.train.transform.max_translate_px << '\n';
    os << "horizontal_flip=" << (spec.train.transform.horizontal_flip ? "true" : "false") << '\n';
    os << "normalize_mean=" << join_reals(spec.train.transform.normalize_mean) << '\n';
    os << "normalize_std=" << join_reals(spec.train.transform.normalize_std) << '\n';
    os << "image_height=" << spec.train.transform.image_height << '\n';
    os << "image_width=" << spec.train.transform.image_width << '\n';
    os << "channels=" << spec.train.transform.channels << '\n';
    os << "snapshot_dir=" << spec.train.snapshot_dir << '\n';
    os << "score_dump_dir=" << spec.train.score_dump_dir << '\n';
    os << "repeat_seeds=" << join_u64s(spec.repeat_seeds) << '\n';
    os << "output_dir=" << spec.output_dir << '\n';
    return os.str();
}

Mode mode_from_string(const std::string& name) {
    if (name == "standard") return Mode::standard;
    if (name == "srt") return Mode::srt;
    if (name == "srt_ce_only") return Mode::srt_ce_only;
    if (name == "srt_ce_train") return Mode::srt_ce_train;
    if (name == "srt_no_ensemble") return Mode::srt_no_ensemble;
    if (name == "srt_with_current") return Mode::srt_with_current;
    throw std::invalid_argument(
        "unknown mode '" + name +
        "'; known modes: standard srt srt_ce_only srt_ce_train srt_no_ensemble srt_with_current");
}

std::string mode_name(Mode mode) {
    switch (mode) {
        case Mode::standard: return "standard";
        case Mode::srt: return "srt";
        case Mode::srt_ce_only: return "srt_ce_only";
        case Mode::srt_ce_train: return "srt_ce_train";
        case Mode::srt_no_ensemble: return "srt_no_ensemble";
        case Mode::srt_with_current: return "srt_with_current";
    }
    throw std::logic_error("unhandled mode");
}

TrainConfig apply_mode(TrainConfig cfg, Mode mode) {
    switch (mode) {
        case Mode::standard:
            cfg.filter_enabled = false;
            cfg.lambda = 1.0;
            cfg.use_js_train = false;
            cfg.eps_min = cfg.eps_max; // constant lr
            break;
        case Mode::srt:
            break;
        case Mode::srt_ce_only:
            cfg.use_js_acq = false;
            break;
        case Mode::srt_ce_train:
            cfg.use_js_train = false;
            break;
        case Mode::srt_no_ensemble:
            cfg.use_snapshot_ensemble = false;
            cfg.include_current_model = true;
            break;
        case Mode::srt_with_current:
            cfg.include_current_model = true;
            break;
    }
    return cfg;
}

std::pair<LabeledDataset, LabeledDataset> load_experiment_data(const ExperimentSpec& spec) {
    if (spec.dataset == DatasetKind::mnist) {
        if (spec.mnist_dir.empty()) {
            throw std::invalid_argument("mnist_dir: required when dataset=mnist");
        }
        LabeledDataset train = load_idx(spec.mnist_dir + "/train-images-idx3-ubyte",
                                        spec.mnist_dir + "/train-labels-idx1-ubyte");
        LabeledDataset test = load_idx(spec.mnist_dir + "/t10k-images-idx3-ubyte",
                                       spec.mnist_dir + "/t10k-labels-idx1-ubyte");
        return {std::move(train), std::move(test)};
    }

    const BlobsParams& bp = spec.blobs;
    // One draw with shared means, then a per-class split into train and test.
    LabeledDataset all = make_blobs(bp.num_classes, bp.per_class + bp.test_per_class, bp.dim,
                                    bp.separation, bp.seed);
    if (bp.pad_px > 0) {
        const int side = int(std::lround(std::sqrt(double(bp.dim))));
        if (side * side != bp.dim) {
            throw std::invalid_argument("blobs_pad_px: blobs_dim " + std::to_string(bp.dim) +
                                        " is not a square grid");
        }
        // Zero frame around the signal grid: a 1-px translation then only
        // permutes coordinates, the class pattern survives intact.
        const int wide = side + 2 * bp.pad_px;
        SampleMatrix padded = SampleMatrix::Zero(all.features.rows(),
                                                 Eigen::Index(wide) * wide);
        for (Eigen::Index i = 0; i < all.features.rows(); ++i) {
            for (int r = 0; r < side; ++r) {
                for (int c = 0; c < side; ++c) {
                    padded(i, Eigen::Index(r + bp.pad_px) * wide + (c + bp.pad_px)) =
                        all.features(i, Eigen::Index(r) * side + c);
                }
            }
        }
        all.features = std::move(padded);
        all.image_height = all.image_width = wide;
        all.channels = 1;
    }
    const Eigen::Index feat_dim = all.features.cols();
    const int block = bp.per_class + bp.test_per_class;
    LabeledDataset train, test;
    train.features.resize(Eigen::Index(bp.num_classes) * bp.per_class, feat_dim);
    test.features.resize(Eigen::Index(bp.num_classes) * bp.test_per_class, feat_dim);
    for (int c = 0; c < bp.num_classes; ++c) {
        const Eigen::Index src = Eigen::Index(c) * block;
        train.features.middleRows(Eigen::Index(c) * bp.per_class, bp.per_class) =
            all.features.middleRows(src, bp.per_class);
        test.features.middleRows(Eigen::Index(c) * bp.test_per_class, bp.test_per_class) =
            all.features.middleRows(src + bp.per_class, bp.test_per_class);
        for (int i = 0; i < bp.per_class; ++i) train.clean_labels.push_back(c);
        for (int i = 0; i < bp.test_per_class; ++i) test.clean_labels.push_back(c);
    }
    train.noisy_labels = train.clean_labels;
    test.noisy_labels = test.clean_labels;
    train.num_classes = test.num_classes = bp.num_classes;
    train.image_height = test.image_height = all.image_height;
    train.image_width = test.image_width = all.image_width;
    train.channels = test.channels = all.channels;
    return {std::move(train), std::move(test)};
}

AggregateReport run_experiment(const ExperimentSpec& spec) {
    if (spec.repeat_seeds.empty()) {
        throw std::invalid_argument("repeat_seeds: must be non-empty");
    }
    std::filesystem::create_directories(spec.output_dir);
    {
        std::ofstream cfg_out(spec.output_dir + "/config.txt");
        if (!cfg_out) throw std::runtime_error("cannot write " + spec.output_dir + "/config.txt");
        cfg_out << echo_config(spec);
    }

    const auto [train_clean, test_set] = load_experiment_data(spec);

    AggregateReport report;
    for (std::uint64_t r : spec.repeat_seeds) {
        NoiseSpec noise = spec.noise;
        noise.seed = mix_seed(spec.noise.seed, r, kRoleNoise);
        const LabeledDataset train_noisy = inject_noise(train_clean, noise);

        TrainConfig cfg = spec.train;
        cfg.init_seed = mix_seed(spec.train.init_seed, r, kRoleInit);
        cfg.data_seed = mix_seed(spec.train.data_seed, r, kRoleData);
        cfg.augment_seed = mix_seed(spec.train.augment_seed, r, kRoleAugment);
        if (!cfg.snapshot_dir.empty()) cfg.snapshot_dir += "/seed_" + std::to_string(r);
        if (!cfg.score_dump_dir.empty()) cfg.score_dump_dir += "/seed_" + std::to_string(r);

        RunResult res;
        try {
            res = run(train_noisy, test_set, cfg);
        } catch (const std::exception& e) {
            throw std::runtime_error("seed " + std::to_string(r) + ": " + e.what());
        }

        const std::string seed_dir = spec.output_dir + "/seed_" + std::to_string(r);
        std::filesystem::create_directories(seed_dir);
        write_metrics_csv(seed_dir + "/metrics.csv", res.metrics);

        SeedRun sr;
        sr.seed = r;
        sr.summary = summarize(res.metrics, std::min<int>(10, int(res.metrics.size())));
        sr.metrics = std::move(res.metrics);
        report.seeds.push_back(std::move(sr));
    }

    std::vector<double> means;
    for (const SeedRun& sr : report.seeds) means.push_back(sr.summary.mean_accuracy);
    report.mean_accuracy = 0.0;
    for (double m : means) report.mean_accuracy += m;
    report.mean_accuracy /= double(means.size());
    report.std_accuracy = population_std(means, report.mean_accuracy);

    {
        std::ofstream json_out(spec.output_dir + "/summary.json");
        if (!json_out) throw std::runtime_error("cannot write " + spec.output_dir + "/summary.json");
        json_out << aggregate_json(spec, report) << '\n';
    }
    {
        std::ofstream svg_out(spec.output_dir + "/chart.svg");
        if (!svg_out) throw std::runtime_error("cannot write " + spec.output_dir + "/chart.svg");
        svg_out << render_chart_svg(report.seeds);
    }
    return report;
}

std::vector<ModeRow> compare_modes(const ExperimentSpec& spec, const std::vector<Mode>& modes) {
    if (modes.empty()) throw std::invalid_argument("compare_modes: mode list must be non-empty");
    std::filesystem::create_directories(spec.output_dir);
    std::vector<ModeRow> rows;
    for (Mode mode : modes) {
        ExperimentSpec sub = spec;
        sub.train = apply_mode(spec.train, mode);
        sub.output_dir = spec.output_dir + "/" + mode_name(mode);
        rows.push_back({mode, run_experiment(sub)});
    }
    std::ofstream out(spec.output_dir + "/comparison.csv");
    if (!out) throw std::runtime_error("cannot write " + spec.output_dir + "/comparison.csv");
    out << "mode,mean_accuracy,std_accuracy,seeds\n";
    out.precision(10);
    for (const ModeRow& row : rows) {
        out << mode_name(row.mode) << ',' << row.report.mean_accuracy << ','
            << row.report.std_accuracy << ',' << row.report.seeds.size() << '\n';
    }
    return rows;
}

std::string render_chart_svg(const std::vector<SeedRun>& seeds) {
    const int width = 960, height = 480;
    const int ml = 60, mr = 170, mt = 30, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;
    int max_epoch = 1;
    for (const SeedRun& sr : seeds) {
        for (const EpochMetrics& m : sr.metrics) max_epoch = std::max(max_epoch, m.epoch);
    }
    const auto x_of = [&](double epoch) {
        return ml + pw * (max_epoch > 1 ? (epoch - 1.0) / (max_epoch - 1.0) : 0.5);
    };
    const auto y_of = [&](double v) { return mt + ph * (1.0 - v); };

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    for (int i = 0; i <= 10; ++i) {
        const double v = i / 10.0;
        const double y = y_of(v);
        os << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << (ml + pw) << "\" y2=\"" << y
           << "\" stroke=\"#dddddd\"/>\n";
        os << "<text x=\"" << (ml - 8) << "\" y=\"" << (y + 4)
           << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << v
           << "</text>\n";
    }
    const int x_step = std::max(1, max_epoch / 10);
    for (int e = 1; e <= max_epoch; e += x_step) {
        const double x = x_of(e);
        os << "<line x1=\"" << x << "\" y1=\"" << (mt + ph) << "\" x2=\"" << x << "\" y2=\""
           << (mt + ph + 5) << "\" stroke=\"#444444\"/>\n";
        os << "<text x=\"" << x << "\" y=\"" << (mt + ph + 18)
           << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << e
           << "</text>\n";
    }
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"#444444\"/>\n";
    os << "<text x=\"" << (ml + pw / 2) << "\" y=\"" << (height - 12)
       << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">epoch</text>\n";

    const auto polyline = [&](const SeedRun& sr, bool precision_line, const std::string& color) {
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (precision_line) os << " stroke-dasharray=\"5,3\"";
        os << " points=\"";
        for (const EpochMetrics& m : sr.metrics) {
            const double v = precision_line ? m.label_precision : m.test_accuracy;
            os << x_of(m.epoch) << ',' << y_of(v) << ' ';
        }
        os << "\"/>\n";
    };
    const std::vector<std::string> acc_colors = {"#1f77b4", "#2a8fd4", "#15609c", "#4aa3e0",
                                                 "#0d4a7a"};
    const std::vector<std::string> prec_colors = {"#ff7f0e", "#ff9933", "#e06b00", "#ffb259",
                                                  "#c25a00"};
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        polyline(seeds[i], false, acc_colors[i % acc_colors.size()]);
        polyline(seeds[i], true, prec_colors[i % prec_colors.size()]);
    }

    const double lx = ml + pw + 12;
    os << "<line x1=\"" << lx << "\" y1=\"" << (mt + 10) << "\" x2=\"" << (lx + 24) << "\" y2=\""
       << (mt + 10) << "\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";
    os << "<text x=\"" << (lx + 30) << "\" y=\"" << (mt + 14)
       << "\" font-size=\"11\" font-family=\"sans-serif\">test accuracy</text>\n";
    os << "<line x1=\"" << lx << "\" y1=\"" << (mt + 28) << "\" x2=\"" << (lx + 24) << "\" y2=\""
       << (mt + 28) << "\" stroke=\"#ff7f0e\" stroke-width=\"1.5\" stroke-dasharray=\"5,3\"/>\n";
    os << "<text x=\"" << (lx + 30) << "\" y=\"" << (mt + 32)
       << "\" font-size=\"11\" font-family=\"sans-serif\">label precision</text>\n";
    os << "<text x=\"" << (lx + 30) << "\" y=\"" << (mt + 50)
       << "\" font-size=\"11\" font-family=\"sans-serif\">one line per seed</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string aggregate_json(const ExperimentSpec& spec, const AggregateReport& report) {
    nlohmann::json j;
    j["mean_accuracy"] = report.mean_accuracy;
    j["std_accuracy"] = report.std_accuracy;
    j["num_seeds"] = report.seeds.size();
    j["seeds"] = nlohmann::json::array();
    for (const SeedRun& sr : report.seeds) {
        nlohmann::json s;
        s["seed"] = sr.seed;
        s["mean_accuracy"] = sr.summary.mean_accuracy;
        s["std_accuracy"] = sr.summary.std_accuracy;
        s["best_accuracy"] = sr.summary.best_accuracy;
        s["best_epoch"] = sr.summary.best_epoch;
        s["window"] = sr.summary.window;
        j["seeds"].push_back(std::move(s));
    }
    j["config"] = nlohmann::json::object();
    std::istringstream cfg(echo_config(spec));
    std::string line;
    while (std::getline(cfg, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) j["config"][line.substr(0, eq)] = line.substr(eq + 1);
    }
    return j.dump(2);
}

} // namespace srt
