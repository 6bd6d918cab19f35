#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "florafill/embedding.hpp"
#include "florafill/types.hpp"
#include "florafill/weak_label.hpp"

namespace florafill {

class DegenerateCorpusError : public Error {
public:
    DegenerateCorpusError() : Error("training corpus contains a single class") {}
};

class DimensionMismatchError : public Error {
public:
    DimensionMismatchError(std::size_t got, std::size_t expected)
        : Error("input dimension " + std::to_string(got) + " does not match head dimension " +
                std::to_string(expected)) {}
};

// Class index convention: 0 = non-descriptive, 1 = descriptive.
inline constexpr std::size_t kDescriptiveClass = 1;
inline constexpr std::size_t kHiddenDim = 512;

// Probabilities are clamped to [eps, 1-eps] before any log.
inline constexpr double kProbEpsilon = 1e-7;

// Soft bootstrap objective: the observed one-hot target t is diluted by the
// current prediction q with weight (1-beta), and the blend scores q under the
// log loss. Returns -sum_k [beta*t_k + (1-beta)*q_k] * log q_k, the negation
// of the printed sum so that smaller is better.
double soft_bootstrap_loss(std::array<double, 2> q, std::array<double, 2> t, double beta);

struct TrainConfig {
    double beta = 0.20;
    double learning_rate = 1e-2;  // tuned for the hashed n-gram provider
    std::size_t batch_size = 32;
    double clip_norm = 1.0;
    std::size_t epochs = 35;
    std::uint64_t seed = 42;
    double dropout_rate = 0.1;
    // adaptive moment estimation constants
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

// Tuned learning rate for frozen 768-dim transformer embeddings.
inline constexpr double kExternalEmbeddingLearningRate = 3e-5;

// Two fully connected layers over a frozen embedding: D -> 512 (rectified)
// -> 2 logits -> softmax. Dropout is applied to the input embedding in
// training mode only.
class ClassifierHead {
public:
    ClassifierHead() = default;
    ClassifierHead(std::size_t input_dim, double dropout_rate, std::uint64_t init_seed);

    std::size_t input_dim() const { return input_dim_; }
    double dropout_rate() const { return dropout_rate_; }
    std::size_t parameter_count() const;

    std::array<double, 2> forward(std::span<const double> x, bool train_mode = false,
                                  Rng* rng = nullptr) const;
    std::array<double, 2> forward_sparse(const SparseVec& x) const;

    double descriptive_probability(const SparseVec& x) const {
        return forward_sparse(x)[kDescriptiveClass];
    }

    // Flat views over parameters (W1 row-major D x 512, b1, W2 row-major
    // 512 x 2, b2) for the trainer, gradient checks and serialization.
    std::vector<double>& w1() { return w1_; }
    std::vector<double>& b1() { return b1_; }
    std::vector<double>& w2() { return w2_; }
    std::vector<double>& b2() { return b2_; }
    const std::vector<double>& w1() const { return w1_; }
    const std::vector<double>& b1() const { return b1_; }
    const std::vector<double>& w2() const { return w2_; }
    const std::vector<double>& b2() const { return b2_; }

private:
    std::size_t input_dim_ = 0;
    double dropout_rate_ = 0.1;
    std::vector<double> w1_, b1_, w2_, b2_;
};

struct HeadGradients {
    std::vector<double> w1, b1, w2, b2;
    double loss = 0.0;
};

// Analytic gradient of soft_bootstrap_loss(forward(x), t, beta) with respect
// to every head parameter, dropout disabled. Shared with the trainer and
// checked against central finite differences in the test suite.
HeadGradients head_gradients(const ClassifierHead& head, const SparseVec& x,
                             std::array<double, 2> target, double beta);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t count = 0;  // spans with this reference label
};

struct DetectorEval {
    ClassMetrics descriptive;
    ClassMetrics non_descriptive;
};

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<DetectorEval> validation;
};

using TrainProgressFn = std::function<void(const EpochLog&)>;

// Deterministic single-threaded training of the head; the provider is frozen.
// Throws DegenerateCorpusError when the corpus has a single class.
ClassifierHead train(const std::vector<LabeledSpan>& corpus, const EmbeddingProvider& provider,
                     const TrainConfig& cfg, const std::vector<LabeledSpan>* validation = nullptr,
                     const TrainProgressFn& progress = nullptr);

// Descriptive-class probability of one sentence.
double score(const ClassifierHead& head, const EmbeddingProvider& provider, std::string_view sentence);

struct SentenceInput {
    std::string species;
    std::string url;
    std::string sentence;
};

// Keeps sentences scoring >= threshold, in input order, with scores attached.
std::vector<ScoredSentence> filter_descriptive(const std::vector<SentenceInput>& sentences,
                                               const ClassifierHead& head,
                                               const EmbeddingProvider& provider,
                                               double threshold = 0.5);
std::vector<ScoredSentence> filter_descriptive(const std::vector<std::string>& sentences,
                                               const ClassifierHead& head,
                                               const EmbeddingProvider& provider,
                                               double threshold = 0.5);

DetectorEval evaluate_detector(const ClassifierHead& head, const EmbeddingProvider& provider,
                               const std::vector<LabeledSpan>& test);

// CSV mirroring the two-class metrics table: one row per class, one column
// block (precision, recall, f1, sentence count) per named split.
std::string detector_report_csv(const std::vector<std::pair<std::string, DetectorEval>>& splits);

// ---------------------------------------------------------------------------
// Model container
// ---------------------------------------------------------------------------

struct DetectorModel {
    ClassifierHead head;
    double threshold = 0.5;
    // provider description; kind "hashed_ngram" is reconstructable, external
    // vectors must be re-supplied by the caller
    std::string provider_kind = "hashed_ngram";
    std::size_t embedding_dim = kDefaultEmbeddingDim;
    std::uint64_t hash_seed = kDefaultHashSeed;

    std::unique_ptr<EmbeddingProvider> make_provider() const;

    void save(const std::filesystem::path& path) const;
    static DetectorModel load(const std::filesystem::path& path);
};

}  // namespace florafill
