#include "florafill/detector.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "florafill/csv.hpp"

namespace florafill {

namespace {

std::array<double, 2> softmax2(double z0, double z1) {
    double m = std::max(z0, z1);
    double e0 = std::exp(z0 - m);
    double e1 = std::exp(z1 - m);
    double sum = e0 + e1;
    return {e0 / sum, e1 / sum};
}

double clamp_prob(double q) { return std::min(std::max(q, kProbEpsilon), 1.0 - kProbEpsilon); }

struct ForwardScratch {
    std::vector<double> hidden_pre;
    std::vector<double> hidden_act;
    std::array<double, 2> probs{};
};

void forward_sparse_into(const ClassifierHead& head, const SparseVec& x, ForwardScratch& s) {
    const std::size_t H = kHiddenDim;
    const auto& w1 = head.w1();
    const auto& b1 = head.b1();
    const auto& w2 = head.w2();
    const auto& b2 = head.b2();

    s.hidden_pre.assign(b1.begin(), b1.end());
    for (const auto& [d, v] : x) {
        if (d >= head.input_dim()) throw DimensionMismatchError(d + 1, head.input_dim());
        const double* row = &w1[d * H];
        for (std::size_t h = 0; h < H; ++h) s.hidden_pre[h] += v * row[h];
    }
    s.hidden_act.resize(H);
    for (std::size_t h = 0; h < H; ++h) s.hidden_act[h] = s.hidden_pre[h] > 0.0 ? s.hidden_pre[h] : 0.0;

    double z0 = b2[0];
    double z1 = b2[1];
    for (std::size_t h = 0; h < H; ++h) {
        z0 += s.hidden_act[h] * w2[h * 2 + 0];
        z1 += s.hidden_act[h] * w2[h * 2 + 1];
    }
    s.probs = softmax2(z0, z1);
}

// Accumulates d(loss)/d(params) for one sample into the g* buffers (gw1 only
// on the rows present in x) and returns the sample loss.
double backprop_sample(const ClassifierHead& head, const SparseVec& x, std::array<double, 2> t,
                       double beta, ForwardScratch& s, std::vector<double>& gw1,
                       std::vector<double>& gb1, std::vector<double>& gw2, std::vector<double>& gb2) {
    const std::size_t H = kHiddenDim;
    forward_sparse_into(head, x, s);
    const std::array<double, 2>& q = s.probs;

    std::array<double, 2> qc{clamp_prob(q[0]), clamp_prob(q[1])};
    double loss = 0.0;
    std::array<double, 2> dq{};
    for (std::size_t k = 0; k < 2; ++k) {
        double coeff = beta * t[k] + (1.0 - beta) * qc[k];
        loss -= coeff * std::log(qc[k]);
        bool clamped = q[k] <= kProbEpsilon || q[k] >= 1.0 - kProbEpsilon;
        dq[k] = clamped ? 0.0 : -((1.0 - beta) * std::log(qc[k]) + coeff / qc[k]);
    }

    // softmax jacobian: dz_j = sum_k dq_k * q_k * (delta_kj - q_j)
    std::array<double, 2> dz{};
    double dot = dq[0] * q[0] + dq[1] * q[1];
    for (std::size_t j = 0; j < 2; ++j) dz[j] = q[j] * (dq[j] - dot);

    const auto& w2 = head.w2();
    for (std::size_t h = 0; h < H; ++h) {
        double act = s.hidden_act[h];
        gw2[h * 2 + 0] += act * dz[0];
        gw2[h * 2 + 1] += act * dz[1];
    }
    gb2[0] += dz[0];
    gb2[1] += dz[1];

    for (std::size_t h = 0; h < H; ++h) {
        if (s.hidden_pre[h] <= 0.0) continue;
        double dpre = w2[h * 2 + 0] * dz[0] + w2[h * 2 + 1] * dz[1];
        gb1[h] += dpre;
        for (const auto& [d, v] : x) gw1[d * H + h] += v * dpre;
    }
    return loss;
}

std::array<double, 2> one_hot(SpanLabel label) {
    return label == SpanLabel::descriptive ? std::array<double, 2>{0.0, 1.0}
                                           : std::array<double, 2>{1.0, 0.0};
}

}  // namespace

double soft_bootstrap_loss(std::array<double, 2> q, std::array<double, 2> t, double beta) {
    if (beta < 0.0 || beta > 1.0) throw Error("beta must be in [0,1]");
    double loss = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
        double qc = clamp_prob(q[k]);
        loss -= (beta * t[k] + (1.0 - beta) * qc) * std::log(qc);
    }
    return loss;
}

ClassifierHead::ClassifierHead(std::size_t input_dim, double dropout_rate, std::uint64_t init_seed)
    : input_dim_(input_dim), dropout_rate_(dropout_rate) {
    if (input_dim_ == 0) throw Error("head input dimension must be positive");
    if (dropout_rate_ < 0.0 || dropout_rate_ >= 1.0) throw Error("dropout rate must be in [0,1)");
    Rng rng(init_seed);
    double w1_scale = 1.0 / std::sqrt(static_cast<double>(input_dim_));
    double w2_scale = 1.0 / std::sqrt(static_cast<double>(kHiddenDim));
    w1_.resize(input_dim_ * kHiddenDim);
    for (double& w : w1_) w = rng.next_gaussian() * w1_scale;
    b1_.assign(kHiddenDim, 0.0);
    w2_.resize(kHiddenDim * 2);
    for (double& w : w2_) w = rng.next_gaussian() * w2_scale;
    b2_.assign(2, 0.0);
}

std::size_t ClassifierHead::parameter_count() const {
    return w1_.size() + b1_.size() + w2_.size() + b2_.size();
}

std::array<double, 2> ClassifierHead::forward(std::span<const double> x, bool train_mode,
                                              Rng* rng) const {
    if (x.size() != input_dim_) throw DimensionMismatchError(x.size(), input_dim_);
    SparseVec sparse;
    sparse.reserve(x.size());
    for (std::size_t d = 0; d < x.size(); ++d)
        if (x[d] != 0.0) sparse.emplace_back(d, x[d]);
    if (train_mode && dropout_rate_ > 0.0) {
        if (!rng) throw Error("training-mode forward needs an rng for dropout");
        double keep = 1.0 - dropout_rate_;
        SparseVec kept;
        kept.reserve(sparse.size());
        for (const auto& [d, v] : sparse)
            if (rng->next_double() >= dropout_rate_) kept.emplace_back(d, v / keep);
        sparse = std::move(kept);
    }
    ForwardScratch s;
    forward_sparse_into(*this, sparse, s);
    return s.probs;
}

std::array<double, 2> ClassifierHead::forward_sparse(const SparseVec& x) const {
    ForwardScratch s;
    forward_sparse_into(*this, x, s);
    return s.probs;
}

HeadGradients head_gradients(const ClassifierHead& head, const SparseVec& x,
                             std::array<double, 2> target, double beta) {
    HeadGradients g;
    g.w1.assign(head.w1().size(), 0.0);
    g.b1.assign(head.b1().size(), 0.0);
    g.w2.assign(head.w2().size(), 0.0);
    g.b2.assign(head.b2().size(), 0.0);
    ForwardScratch s;
    g.loss = backprop_sample(head, x, target, beta, s, g.w1, g.b1, g.w2, g.b2);
    return g;
}

ClassifierHead train(const std::vector<LabeledSpan>& corpus, const EmbeddingProvider& provider,
                     const TrainConfig& cfg, const std::vector<LabeledSpan>* validation,
                     const TrainProgressFn& progress) {
    if (corpus.empty()) throw DegenerateCorpusError();
    bool has_pos = false;
    bool has_neg = false;
    for (const LabeledSpan& span : corpus) {
        (span.label == SpanLabel::descriptive ? has_pos : has_neg) = true;
        if (has_pos && has_neg) break;
    }
    if (!has_pos || !has_neg) throw DegenerateCorpusError();
    if (cfg.batch_size == 0) throw Error("batch_size must be positive");
    if (cfg.clip_norm <= 0.0) throw Error("clip_norm must be positive");
    if (cfg.beta < 0.0 || cfg.beta > 1.0) throw Error("beta must be in [0,1]");

    const std::size_t D = provider.dim();
    const std::size_t H = kHiddenDim;

    // the provider is frozen: embeddings are computed once, up front
    std::vector<SparseVec> features(corpus.size());
    std::vector<std::array<double, 2>> targets(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        features[i] = provider.embed_sparse_tokens(corpus[i].tokens);
        targets[i] = one_hot(corpus[i].label);
    }

    ClassifierHead head(D, cfg.dropout_rate, cfg.seed ^ 0x68656164ULL);

    std::vector<double> gw1(D * H, 0.0), gb1(H, 0.0), gw2(H * 2, 0.0), gb2(2, 0.0);
    std::vector<double> mw1(D * H, 0.0), vw1(D * H, 0.0);
    std::vector<double> mb1(H, 0.0), vb1(H, 0.0);
    std::vector<double> mw2(H * 2, 0.0), vw2(H * 2, 0.0);
    std::vector<double> mb2(2, 0.0), vb2(2, 0.0);

    std::vector<std::size_t> order(corpus.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Rng rng(cfg.seed);
    ForwardScratch scratch;
    SparseVec dropped;
    std::vector<std::size_t> touched_rows;
    std::size_t adam_step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;

        for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
            std::size_t end = std::min(begin + cfg.batch_size, order.size());
            std::size_t batch_n = end - begin;
            std::fill(gb1.begin(), gb1.end(), 0.0);
            std::fill(gw2.begin(), gw2.end(), 0.0);
            std::fill(gb2.begin(), gb2.end(), 0.0);
            touched_rows.clear();

            for (std::size_t bi = begin; bi < end; ++bi) {
                const SparseVec& x = features[order[bi]];
                const SparseVec* input = &x;
                if (cfg.dropout_rate > 0.0) {
                    double keep = 1.0 - cfg.dropout_rate;
                    dropped.clear();
                    for (const auto& [d, v] : x)
                        if (rng.next_double() >= cfg.dropout_rate) dropped.emplace_back(d, v / keep);
                    input = &dropped;
                }
                for (const auto& [d, _] : *input) touched_rows.push_back(d);
                epoch_loss += backprop_sample(head, *input, targets[order[bi]], cfg.beta, scratch,
                                              gw1, gb1, gw2, gb2);
            }
            std::sort(touched_rows.begin(), touched_rows.end());
            touched_rows.erase(std::unique(touched_rows.begin(), touched_rows.end()),
                               touched_rows.end());

            // mean over the batch, then clip the global gradient norm
            double inv_n = 1.0 / static_cast<double>(batch_n);
            double norm_sq = 0.0;
            for (std::size_t d : touched_rows) {
                double* row = &gw1[d * H];
                for (std::size_t h = 0; h < H; ++h) {
                    row[h] *= inv_n;
                    norm_sq += row[h] * row[h];
                }
            }
            for (auto* g : {&gb1, &gw2, &gb2})
                for (double& v : *g) {
                    v *= inv_n;
                    norm_sq += v * v;
                }
            double norm = std::sqrt(norm_sq);
            if (norm > cfg.clip_norm) {
                double scale = cfg.clip_norm / norm;
                for (std::size_t d : touched_rows) {
                    double* row = &gw1[d * H];
                    for (std::size_t h = 0; h < H; ++h) row[h] *= scale;
                }
                for (auto* g : {&gb1, &gw2, &gb2})
                    for (double& v : *g) v *= scale;
            }

            ++adam_step;
            double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam_step));
            double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam_step));
            auto adam_update = [&](std::vector<double>& theta, std::vector<double>& m,
                                   std::vector<double>& v, const std::vector<double>& g) {
                for (std::size_t i = 0; i < theta.size(); ++i) {
                    m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g[i];
                    v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
                    double mhat = m[i] / bc1;
                    double vhat = v[i] / bc2;
                    theta[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.adam_epsilon);
                }
            };
            adam_update(head.w1(), mw1, vw1, gw1);
            adam_update(head.b1(), mb1, vb1, gb1);
            adam_update(head.w2(), mw2, vw2, gw2);
            adam_update(head.b2(), mb2, vb2, gb2);

            for (std::size_t d : touched_rows) {
                double* row = &gw1[d * H];
                std::fill(row, row + H, 0.0);
            }
        }

        if (progress) {
            EpochLog log;
            log.epoch = epoch + 1;
            log.train_loss = epoch_loss / static_cast<double>(corpus.size());
            if (validation && !validation->empty())
                log.validation = evaluate_detector(head, provider, *validation);
            progress(log);
        }
    }
    return head;
}

double score(const ClassifierHead& head, const EmbeddingProvider& provider,
             std::string_view sentence) {
    return head.descriptive_probability(provider.embed_sparse(sentence));
}

std::vector<ScoredSentence> filter_descriptive(const std::vector<SentenceInput>& sentences,
                                               const ClassifierHead& head,
                                               const EmbeddingProvider& provider, double threshold) {
    std::vector<ScoredSentence> out;
    for (const SentenceInput& input : sentences) {
        double s = score(head, provider, input.sentence);
        if (s >= threshold)
            out.push_back(ScoredSentence{input.species, input.url, input.sentence, s});
    }
    return out;
}

std::vector<ScoredSentence> filter_descriptive(const std::vector<std::string>& sentences,
                                               const ClassifierHead& head,
                                               const EmbeddingProvider& provider, double threshold) {
    std::vector<SentenceInput> inputs;
    inputs.reserve(sentences.size());
    for (const std::string& s : sentences) inputs.push_back(SentenceInput{"", "", s});
    return filter_descriptive(inputs, head, provider, threshold);
}

DetectorEval evaluate_detector(const ClassifierHead& head, const EmbeddingProvider& provider,
                               const std::vector<LabeledSpan>& test) {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (const LabeledSpan& span : test) {
        bool truth = span.label == SpanLabel::descriptive;
        bool predicted = head.descriptive_probability(provider.embed_sparse_tokens(span.tokens)) >= 0.5;
        if (truth && predicted) ++tp;
        else if (!truth && predicted) ++fp;
        else if (truth && !predicted) ++fn;
        else ++tn;
    }
    auto metrics = [](std::size_t tp_, std::size_t fp_, std::size_t fn_, std::size_t total) {
        ClassMetrics m;
        m.count = total;
        m.precision = tp_ + fp_ ? static_cast<double>(tp_) / static_cast<double>(tp_ + fp_) : 0.0;
        m.recall = tp_ + fn_ ? static_cast<double>(tp_) / static_cast<double>(tp_ + fn_) : 0.0;
        m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                            : 0.0;
        return m;
    };
    DetectorEval eval;
    eval.descriptive = metrics(tp, fp, fn, tp + fn);
    eval.non_descriptive = metrics(tn, fn, fp, tn + fp);
    return eval;
}

std::string detector_report_csv(const std::vector<std::pair<std::string, DetectorEval>>& splits) {
    std::vector<std::string> header{"class"};
    for (const auto& [name, _] : splits) {
        header.push_back(name + " precision");
        header.push_back(name + " recall");
        header.push_back(name + " f1");
        header.push_back(name + " sentences");
    }
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", v);
        return std::string(buf);
    };
    std::string out = csv::write_row(header);
    for (bool descriptive : {false, true}) {
        std::vector<std::string> row{descriptive ? "Descriptive" : "Non-descriptive"};
        for (const auto& [_, eval] : splits) {
            const ClassMetrics& m = descriptive ? eval.descriptive : eval.non_descriptive;
            row.push_back(fmt(m.precision));
            row.push_back(fmt(m.recall));
            row.push_back(fmt(m.f1));
            row.push_back(std::to_string(m.count));
        }
        out += csv::write_row(row);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model container
// ---------------------------------------------------------------------------

namespace {
constexpr char kModelMagic[8] = {'F', 'F', 'D', 'E', 'T', 'M', 'D', 'L'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(const std::string& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw Error("model file truncated");
    T value;
    std::memcpy(&value, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

void put_array(std::string& out, const std::vector<double>& values) {
    put<std::uint64_t>(out, values.size());
    for (double v : values) put(out, v);
}

std::vector<double> take_array(const std::string& in, std::size_t& pos) {
    std::uint64_t n = take<std::uint64_t>(in, pos);
    std::vector<double> values(n);
    for (std::uint64_t i = 0; i < n; ++i) values[i] = take<double>(in, pos);
    return values;
}
}  // namespace

std::unique_ptr<EmbeddingProvider> DetectorModel::make_provider() const {
    if (provider_kind == "hashed_ngram")
        return std::make_unique<HashedNgramProvider>(embedding_dim, hash_seed);
    throw Error("provider kind \"" + provider_kind +
                "\" cannot be reconstructed from the model file; supply it explicitly");
}

void DetectorModel::save(const std::filesystem::path& path) const {
    std::string out;
    out.append(kModelMagic, sizeof(kModelMagic));
    put<std::uint32_t>(out, kModelVersion);
    put<std::uint32_t>(out, provider_kind == "hashed_ngram" ? 0u : 1u);
    put<std::uint64_t>(out, embedding_dim);
    put<std::uint64_t>(out, hash_seed);
    put<std::uint64_t>(out, kHiddenDim);
    put<double>(out, head.dropout_rate());
    put<double>(out, threshold);
    put_array(out, head.w1());
    put_array(out, head.b1());
    put_array(out, head.w2());
    put_array(out, head.b2());
    write_file(path, out);
}

DetectorModel DetectorModel::load(const std::filesystem::path& path) {
    std::string in = read_file(path);
    if (in.size() < sizeof(kModelMagic) || std::memcmp(in.data(), kModelMagic, sizeof(kModelMagic)) != 0)
        throw Error("not a detector model file: " + path.string());
    std::size_t pos = sizeof(kModelMagic);
    std::uint32_t version = take<std::uint32_t>(in, pos);
    if (version != kModelVersion)
        throw Error("unsupported model version " + std::to_string(version));
    std::uint32_t kind = take<std::uint32_t>(in, pos);
    DetectorModel model;
    model.provider_kind = kind == 0 ? "hashed_ngram" : "external";
    model.embedding_dim = take<std::uint64_t>(in, pos);
    model.hash_seed = take<std::uint64_t>(in, pos);
    std::uint64_t hidden = take<std::uint64_t>(in, pos);
    if (hidden != kHiddenDim)
        throw Error("model hidden dimension " + std::to_string(hidden) + " unsupported");
    double dropout = take<double>(in, pos);
    model.threshold = take<double>(in, pos);
    ClassifierHead head(model.embedding_dim, dropout, 0);
    head.w1() = take_array(in, pos);
    head.b1() = take_array(in, pos);
    head.w2() = take_array(in, pos);
    head.b2() = take_array(in, pos);
    if (head.w1().size() != model.embedding_dim * kHiddenDim || head.b1().size() != kHiddenDim ||
        head.w2().size() != kHiddenDim * 2 || head.b2().size() != 2)
        throw Error("model parameter block sizes do not match the declared dimensions");
    model.head = std::move(head);
    return model;
}

}  // namespace florafill
