#include "srt/mlp.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace srt {

static_assert(std::endian::native == std::endian::little,
              "snapshot i/o assumes a little-endian host");

ModelParams init_params(Eigen::Index input_dim, Eigen::Index hidden_dim,
                        Eigen::Index output_dim, std::uint64_t seed) {
    if (input_dim < 1 || hidden_dim < 1 || output_dim < 2) {
        throw std::invalid_argument("invalid network dims " + std::to_string(input_dim) + "/" +
                                    std::to_string(hidden_dim) + "/" + std::to_string(output_dim));
    }
    RngStream rng(mix_seed(seed, 0x696e6974)); // "init"
    ModelParams p;
    p.w1.resize(input_dim, hidden_dim);
    p.w2.resize(hidden_dim, output_dim);
    const double lim1 = std::sqrt(6.0 / double(input_dim + hidden_dim));
    const double lim2 = std::sqrt(6.0 / double(hidden_dim + output_dim));
    for (Eigen::Index i = 0; i < input_dim; ++i) {
        for (Eigen::Index j = 0; j < hidden_dim; ++j) p.w1(i, j) = rng.uniform_real(-lim1, lim1);
    }
    for (Eigen::Index i = 0; i < hidden_dim; ++i) {
        for (Eigen::Index j = 0; j < output_dim; ++j) p.w2(i, j) = rng.uniform_real(-lim2, lim2);
    }
    p.b1 = Eigen::VectorXd::Zero(hidden_dim);
    p.b2 = Eigen::VectorXd::Zero(output_dim);
    return p;
}

AdamState init_adam_state(const ModelParams& params) {
    AdamState s;
    s.m_w1 = Eigen::MatrixXd::Zero(params.w1.rows(), params.w1.cols());
    s.v_w1 = s.m_w1;
    s.m_b1 = Eigen::VectorXd::Zero(params.b1.size());
    s.v_b1 = s.m_b1;
    s.m_w2 = Eigen::MatrixXd::Zero(params.w2.rows(), params.w2.cols());
    s.v_w2 = s.m_w2;
    s.m_b2 = Eigen::VectorXd::Zero(params.b2.size());
    s.v_b2 = s.m_b2;
    return s;
}

namespace {

struct ForwardCache {
    Eigen::MatrixXd pre;     // B x hidden, pre-activation
    Eigen::MatrixXd hidden;  // relu(pre)
    Eigen::MatrixXd logits;  // B x M
};

ForwardCache forward_cache(const ModelParams& p, const SampleMatrix& x) {
    ForwardCache c;
    c.pre = (x * p.w1).rowwise() + p.b1.transpose();
    c.hidden = c.pre.cwiseMax(0.0);
    c.logits = (c.hidden * p.w2).rowwise() + p.b2.transpose();
    return c;
}

void backward_from_dlogits(const ModelParams& p, const SampleMatrix& x, const ForwardCache& c,
                           const Eigen::MatrixXd& dlogits, Gradients& g) {
    g.w2.noalias() += c.hidden.transpose() * dlogits;
    g.b2 += dlogits.colwise().sum().transpose();
    Eigen::MatrixXd dpre = dlogits * p.w2.transpose();
    dpre = dpre.array() * (c.pre.array() > 0.0).cast<double>();
    g.w1.noalias() += x.transpose() * dpre;
    g.b1 += dpre.colwise().sum().transpose();
}

constexpr double kProbFloor = 1e-12;

} // namespace

Eigen::MatrixXd forward_logits(const ModelParams& params, const SampleMatrix& x) {
    return forward_cache(params, x).logits;
}

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
        out.row(i) = logits.row(i).array() - lse;
    }
    return out;
}

Eigen::MatrixXd predict_log_proba(const ModelParams& params, const SampleMatrix& x) {
    return log_softmax_rows(forward_logits(params, x));
}

Eigen::MatrixXd predict_proba(const ModelParams& params, const SampleMatrix& x) {
    return predict_log_proba(params, x).array().exp();
}

LossParts loss_and_grad(const ModelParams& params, const SampleMatrix& plain,
                        const ViewPair& views, const Eigen::MatrixXd& labels, double lambda,
                        Gradients& out) {
    if (lambda < 0.0 || lambda > 1.0) {
        throw std::invalid_argument("lambda must be in [0,1], got " + std::to_string(lambda));
    }
    out.w1 = Eigen::MatrixXd::Zero(params.w1.rows(), params.w1.cols());
    out.b1 = Eigen::VectorXd::Zero(params.b1.size());
    out.w2 = Eigen::MatrixXd::Zero(params.w2.rows(), params.w2.cols());
    out.b2 = Eigen::VectorXd::Zero(params.b2.size());

    LossParts parts;

    if (lambda > 0.0) {
        const auto b = double(plain.rows());
        ForwardCache c = forward_cache(params, plain);
        Eigen::MatrixXd logp = log_softmax_rows(c.logits);
        parts.ce = -(labels.array() * logp.array()).sum() / b;
        Eigen::MatrixXd dlogits = (logp.array().exp().matrix() - labels) * (lambda / b);
        backward_from_dlogits(params, plain, c, dlogits, out);
    }

    if (lambda < 1.0) {
        if (views.first.rows() != plain.rows() || views.second.rows() != plain.rows()) {
            throw std::invalid_argument("view batch sizes do not match the plain batch");
        }
        const auto b = double(plain.rows());
        ForwardCache cu = forward_cache(params, views.first);
        ForwardCache cw = forward_cache(params, views.second);
        Eigen::ArrayXXd p = log_softmax_rows(cu.logits).array().exp().max(kProbFloor);
        Eigen::ArrayXXd q = log_softmax_rows(cw.logits).array().exp().max(kProbFloor);
        Eigen::ArrayXXd log_ratio = (p / q).log();
        parts.js = ((p - q) * log_ratio).sum() / b;

        // d/dp of sum_c [p log(p/q) + q log(q/p)] and its q counterpart.
        Eigen::ArrayXXd gp = log_ratio + 1.0 - q / p;
        Eigen::ArrayXXd gq = -log_ratio + 1.0 - p / q;
        Eigen::ArrayXd inner_p = (gp * p).rowwise().sum();
        Eigen::ArrayXd inner_q = (gq * q).rowwise().sum();
        const double scale = (1.0 - lambda) / b;
        Eigen::MatrixXd du = (p * (gp.colwise() - inner_p) * scale).matrix();
        Eigen::MatrixXd dw = (q * (gq.colwise() - inner_q) * scale).matrix();
        backward_from_dlogits(params, views.first, cu, du, out);
        backward_from_dlogits(params, views.second, cw, dw, out);
    }

    parts.total = lambda * parts.ce + (1.0 - lambda) * parts.js;
    return parts;
}

void adam_step(ModelParams& params, const Gradients& grads, AdamState& state,
               const AdamConfig& config, double lr) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, double(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, double(state.step));
    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = (config.beta2 * v.array() + (1.0 - config.beta2) * g.array().square()).matrix();
        p.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + config.eps);
    };
    update(params.w1, grads.w1, state.m_w1, state.v_w1);
    update(params.b1, grads.b1, state.m_b1, state.v_b1);
    update(params.w2, grads.w2, state.m_w2, state.v_w2);
    update(params.b2, grads.b2, state.m_b2, state.v_b2);
}

namespace {

constexpr char kSnapshotMagic[8] = {'S', 'R', 'T', 'S', 'N', 'P', '0', '1'};

void write_i32(std::ostream& out, std::int32_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::int32_t read_i32(std::istream& in, const std::string& path, const char* field) {
    std::int32_t v;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
        throw std::runtime_error(path + ": truncated while reading " + field);
    }
    return v;
}

void write_doubles(std::ostream& out, const double* data, std::size_t n) {
    out.write(reinterpret_cast<const char*>(data), std::streamsize(n * sizeof(double)));
}

void read_doubles(std::istream& in, const std::string& path, double* data, std::size_t n) {
    if (!in.read(reinterpret_cast<char*>(data), std::streamsize(n * sizeof(double)))) {
        throw std::runtime_error(path + ": truncated parameter payload");
    }
}

} // namespace

void save_snapshot(const ParameterSnapshot& snap, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kSnapshotMagic, sizeof kSnapshotMagic);
    write_i32(out, std::int32_t(snap.cycle_index));
    write_i32(out, std::int32_t(snap.params.input_dim()));
    write_i32(out, std::int32_t(snap.params.hidden_dim()));
    write_i32(out, std::int32_t(snap.params.output_dim()));
    write_doubles(out, snap.params.w1.data(), std::size_t(snap.params.w1.size()));
    write_doubles(out, snap.params.b1.data(), std::size_t(snap.params.b1.size()));
    write_doubles(out, snap.params.w2.data(), std::size_t(snap.params.w2.size()));
    write_doubles(out, snap.params.b2.data(), std::size_t(snap.params.b2.size()));
    if (!out) throw std::runtime_error("write failed for " + path);
}

ParameterSnapshot load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    if (!in.read(magic, sizeof magic)) {
        throw std::runtime_error(path + ": truncated while reading magic");
    }
    if (std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0) {
        throw std::runtime_error(path + ": bad snapshot magic (want SRTSNP01)");
    }
    ParameterSnapshot snap;
    snap.cycle_index = read_i32(in, path, "cycle_index");
    const std::int32_t in_dim = read_i32(in, path, "input_dim");
    const std::int32_t hid = read_i32(in, path, "hidden_dim");
    const std::int32_t out_dim = read_i32(in, path, "output_dim");
    if (in_dim < 1 || hid < 1 || out_dim < 2) {
        throw std::runtime_error(path + ": invalid snapshot dims " + std::to_string(in_dim) + "/" +
                                 std::to_string(hid) + "/" + std::to_string(out_dim));
    }
    snap.params.w1.resize(in_dim, hid);
    snap.params.b1.resize(hid);
    snap.params.w2.resize(hid, out_dim);
    snap.params.b2.resize(out_dim);
    read_doubles(in, path, snap.params.w1.data(), std::size_t(snap.params.w1.size()));
    read_doubles(in, path, snap.params.b1.data(), std::size_t(snap.params.b1.size()));
    read_doubles(in, path, snap.params.w2.data(), std::size_t(snap.params.w2.size()));
    read_doubles(in, path, snap.params.b2.data(), std::size_t(snap.params.b2.size()));
    char extra;
    if (in.read(&extra, 1)) {
        throw std::runtime_error(path + ": trailing bytes after parameter payload");
    }
    return snap;
}

} // namespace srt
