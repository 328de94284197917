#include "srt/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace srt {

namespace {

constexpr double kProbFloor = 1e-12;
// Sub-stream key for the live model; outside the reachable cycle_index range.
constexpr std::uint64_t kLiveMemberKey = 0x6c6976656d646cULL;

} // namespace

SnapshotBuffer::SnapshotBuffer(int capacity) : capacity_(capacity) {
    if (capacity < 1) throw std::invalid_argument("snapshot buffer capacity must be >= 1");
    entries_.reserve(std::size_t(capacity));
}

void SnapshotBuffer::push(ParameterSnapshot snap) {
    if (!entries_.empty() && snap.cycle_index <= entries_.back().cycle_index) {
        throw std::logic_error("snapshot cycle index " + std::to_string(snap.cycle_index) +
                               " not after stored index " +
                               std::to_string(entries_.back().cycle_index));
    }
    entries_.push_back(std::move(snap));
    if (entries_.size() > std::size_t(capacity_)) entries_.erase(entries_.begin());
}

double symmetric_kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
    if (p.size() != q.size()) {
        throw std::invalid_argument("symmetric_kl length mismatch: " + std::to_string(p.size()) +
                                    " vs " + std::to_string(q.size()));
    }
    const Eigen::ArrayXd pc = p.array().max(kProbFloor).min(1.0);
    const Eigen::ArrayXd qc = q.array().max(kProbFloor).min(1.0);
    return (pc * (pc / qc).log()).sum() + (qc * (qc / pc).log()).sum();
}

std::vector<AcquisitionScore> acquisition(const MiniBatch& batch, const SnapshotBuffer& buffer,
                                          const AcquisitionConfig& cfg,
                                          const TransformSpec& transform, RngStream& rng,
                                          const ModelParams* live_params) {
    if (!cfg.use_ce && !cfg.use_js) {
        throw std::invalid_argument("acquisition needs at least one of use_ce/use_js");
    }
    if (cfg.lambda < 0.0 || cfg.lambda > 1.0) {
        throw std::invalid_argument("lambda must be in [0,1], got " + std::to_string(cfg.lambda));
    }

    const Eigen::Index b = batch.size();
    std::vector<AcquisitionScore> scores(static_cast<std::size_t>(b));
    for (Eigen::Index i = 0; i < b; ++i) {
        scores[std::size_t(i)].sample_index = batch.indices[std::size_t(i)];
    }

    std::vector<std::pair<const ModelParams*, std::uint64_t>> members;
    for (const ParameterSnapshot& s : buffer.entries()) {
        members.emplace_back(&s.params, std::uint64_t(s.cycle_index));
    }
    if (cfg.include_current_model && live_params != nullptr) {
        members.emplace_back(live_params, kLiveMemberKey);
    }
    if (members.empty()) return scores; // P = 0, empty sum

    // One draw keys all member sub-streams; a member's stream depends only
    // on this base and its own key, never on the other members present.
    const std::uint64_t seed_base = rng.next_u64();

    const bool want_ce = cfg.use_ce && cfg.lambda > 0.0;
    const bool want_js = cfg.use_js && cfg.lambda < 1.0;

    SampleMatrix plain;
    if (want_ce) plain = normalize(batch.features, transform);

    for (const auto& [params, key] : members) {
        if (want_ce) {
            const Eigen::MatrixXd logp = predict_log_proba(*params, plain);
            for (Eigen::Index i = 0; i < b; ++i) {
                scores[std::size_t(i)].ce_part -= batch.labels.row(i).dot(logp.row(i));
            }
        }
        if (want_js) {
            RngStream member_rng(mix_seed(seed_base, key));
            const ViewPair views = make_view_pair(batch.features, transform, member_rng);
            const Eigen::ArrayXXd p =
                predict_proba(*params, views.first).array().max(kProbFloor).min(1.0);
            const Eigen::ArrayXXd q =
                predict_proba(*params, views.second).array().max(kProbFloor).min(1.0);
            const Eigen::ArrayXd js = ((p - q) * (p / q).log()).rowwise().sum();
            for (Eigen::Index i = 0; i < b; ++i) scores[std::size_t(i)].js_part += js(i);
        }
    }

    for (auto& s : scores) s.value = cfg.lambda * s.ce_part + (1.0 - cfg.lambda) * s.js_part;
    return scores;
}

FilterResult filter_batch(const MiniBatch& batch, const std::vector<AcquisitionScore>& scores,
                          double keep_rate) {
    if (keep_rate <= 0.0 || keep_rate > 1.0) {
        throw std::invalid_argument("keep_rate must be in (0,1], got " + std::to_string(keep_rate));
    }
    const std::size_t b = std::size_t(batch.size());
    if (scores.size() != b) {
        throw std::invalid_argument("score count " + std::to_string(scores.size()) +
                                    " does not match batch size " + std::to_string(b));
    }
    auto n_keep = std::size_t(std::ceil(keep_rate * double(b)));
    n_keep = std::max<std::size_t>(1, std::min(n_keep, b));

    std::vector<std::size_t> rows(b);
    std::iota(rows.begin(), rows.end(), std::size_t(0));
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t c) {
        if (scores[a].value != scores[c].value) return scores[a].value < scores[c].value;
        return scores[a].sample_index < scores[c].sample_index;
    });

    std::vector<std::size_t> kept_rows(rows.begin(), rows.begin() + std::ptrdiff_t(n_keep));
    std::sort(kept_rows.begin(), kept_rows.end()); // restore batch order
    std::vector<bool> is_kept(b, false);
    for (std::size_t r : kept_rows) is_kept[r] = true;

    FilterResult res;
    res.kept.indices.reserve(n_keep);
    res.kept.features.resize(Eigen::Index(n_keep), batch.features.cols());
    res.kept.labels.resize(Eigen::Index(n_keep), batch.labels.cols());
    for (std::size_t out = 0; out < kept_rows.size(); ++out) {
        const std::size_t r = kept_rows[out];
        res.kept.indices.push_back(batch.indices[r]);
        res.kept.features.row(Eigen::Index(out)) = batch.features.row(Eigen::Index(r));
        res.kept.labels.row(Eigen::Index(out)) = batch.labels.row(Eigen::Index(r));
    }
    for (std::size_t r = 0; r < b; ++r) {
        if (!is_kept[r]) res.dropped_indices.push_back(batch.indices[r]);
    }
    return res;
}

void write_scores_csv(const std::string& path, const std::vector<AcquisitionScore>& scores,
                      const LabeledDataset& dataset) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "sample_index,value,ce_part,js_part,is_clean\n";
    out.precision(10);
    for (const auto& s : scores) {
        out << s.sample_index << ',' << s.value << ',' << s.ce_part << ',' << s.js_part << ','
            << (dataset.is_clean(s.sample_index) ? 1 : 0) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

} // namespace srt
