#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "florafill/detector.hpp"
#include "synthetic.hpp"

using namespace florafill;

namespace {

TrainConfig quick_config(std::uint64_t seed = 42) {
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 32;
    cfg.learning_rate = 1e-2;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("soft bootstrap loss worked values") {
    // beta = 1 reduces to cross-entropy
    CHECK(soft_bootstrap_loss({0.5, 0.5}, {1, 0}, 1.0) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // independent scalar evaluation of -(0.64 ln 0.8 + 0.36 ln 0.2)
    double oracle = -(0.64 * std::log(0.8) + 0.36 * std::log(0.2));
    double loss = soft_bootstrap_loss({0.8, 0.2}, {0, 1}, 0.2);
    CHECK(loss == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(std::abs(loss - 0.722210) < 1e-6);

    // confident and correct: vanishing loss
    CHECK(soft_bootstrap_loss({1.0 - 1e-7, 1e-7}, {1, 0}, 0.2) < 1e-5);
}

TEST_CASE("loss is affine in beta and hits both endpoints") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        double q1 = 0.001 + 0.998 * rng.next_double();
        std::array<double, 2> q{q1, 1.0 - q1};
        std::array<double, 2> t = rng.next_double() < 0.5 ? std::array<double, 2>{1, 0}
                                                          : std::array<double, 2>{0, 1};
        double ce = -(t[0] * std::log(q[0]) + t[1] * std::log(q[1]));
        double entropy = -(q[0] * std::log(q[0]) + q[1] * std::log(q[1]));
        CHECK(std::abs(soft_bootstrap_loss(q, t, 1.0) - ce) < 1e-12);
        CHECK(std::abs(soft_bootstrap_loss(q, t, 0.0) - entropy) < 1e-12);
        double beta = rng.next_double();
        double blended = beta * ce + (1.0 - beta) * entropy;
        CHECK(soft_bootstrap_loss(q, t, beta) == doctest::Approx(blended).epsilon(1e-12));
    }
}

TEST_CASE("loss is finite at clamped extremes") {
    CHECK(std::isfinite(soft_bootstrap_loss({0.0, 1.0}, {1, 0}, 0.2)));
    CHECK(std::isfinite(soft_bootstrap_loss({1.0, 0.0}, {0, 1}, 1.0)));
    CHECK_THROWS_AS(soft_bootstrap_loss({0.5, 0.5}, {1, 0}, 1.5), Error);
}

TEST_CASE("softmax output sums to one") {
    ClassifierHead head(16, 0.0, 9);
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
        std::vector<double> x(16);
        for (double& v : x) v = rng.next_gaussian();
        auto q = head.forward(x);
        CHECK(std::abs(q[0] + q[1] - 1.0) < 1e-9);
    }
}

TEST_CASE("forward rejects mismatched input dimension") {
    ClassifierHead head(16, 0.0, 9);
    std::vector<double> x(8, 0.0);
    CHECK_THROWS_AS(head.forward(x), DimensionMismatchError);
}

TEST_CASE("analytic gradients match central differences") {
    Rng rng(2024);
    const std::size_t D = 12;
    int checked = 0;
    for (int draw = 0; draw < 25; ++draw) {
        ClassifierHead head(D, 0.0, rng.next_u64());
        SparseVec x;
        for (std::size_t d = 0; d < D; ++d)
            if (rng.next_double() < 0.7) x.emplace_back(d, rng.next_gaussian());
        if (x.empty()) x.emplace_back(0, 1.0);
        std::array<double, 2> t = rng.next_double() < 0.5 ? std::array<double, 2>{1, 0}
                                                          : std::array<double, 2>{0, 1};
        double beta = rng.next_double();
        HeadGradients grads = head_gradients(head, x, t, beta);

        auto loss_at = [&](ClassifierHead& h) {
            return soft_bootstrap_loss(h.forward_sparse(x), t, beta);
        };
        auto check_param = [&](std::vector<double>& theta, const std::vector<double>& grad,
                               std::size_t idx, ClassifierHead& h) {
            double h_step = 1e-6 * std::max(1.0, std::abs(theta[idx]));
            double saved = theta[idx];
            theta[idx] = saved + h_step;
            double up = loss_at(h);
            theta[idx] = saved - h_step;
            double down = loss_at(h);
            theta[idx] = saved;
            double fd = (up - down) / (2.0 * h_step);
            double scale = std::max({std::abs(fd), std::abs(grad[idx]), 1e-6});
            CHECK(std::abs(fd - grad[idx]) / scale < 1e-4);
            ++checked;
        };
        ClassifierHead probe = head;
        for (int k = 0; k < 6; ++k) {
            check_param(probe.w1(), grads.w1, rng.next_below(probe.w1().size()), probe);
            check_param(probe.b1(), grads.b1, rng.next_below(probe.b1().size()), probe);
            check_param(probe.w2(), grads.w2, rng.next_below(probe.w2().size()), probe);
            check_param(probe.b2(), grads.b2, rng.next_below(probe.b2().size()), probe);
        }
    }
    CHECK(checked == 25 * 6 * 4);
}

TEST_CASE("training is deterministic given identical inputs") {
    auto corpus = testing::make_sentence_corpus(60, 11);
    HashedNgramProvider provider(512);
    ClassifierHead a = train(corpus.spans, provider, quick_config());
    ClassifierHead b = train(corpus.spans, provider, quick_config());
    CHECK(a.w1() == b.w1());
    CHECK(a.b1() == b.b1());
    CHECK(a.w2() == b.w2());
    CHECK(a.b2() == b.b2());

    ClassifierHead c = train(corpus.spans, provider, quick_config(43));
    CHECK(a.w1() != c.w1());
}

TEST_CASE("training rejects a single-class corpus") {
    std::vector<LabeledSpan> spans;
    LabeledSpan span;
    span.tokens = std::vector<std::string>(12, "tok");
    span.label = SpanLabel::descriptive;
    spans.push_back(span);
    spans.push_back(span);
    HashedNgramProvider provider(128);
    CHECK_THROWS_AS(train(spans, provider, quick_config()), DegenerateCorpusError);
    CHECK_THROWS_AS(train({}, provider, quick_config()), DegenerateCorpusError);
}

TEST_CASE("provider outputs are identical before and after training") {
    auto corpus = testing::make_sentence_corpus(40, 13);
    HashedNgramProvider provider(512);
    std::vector<std::string> probes{"The leaves are alternate.", "History of the region.",
                                    "0.5-2 mm long petiole."};
    std::vector<SparseVec> before;
    for (const auto& p : probes) before.push_back(provider.embed_sparse(p));
    (void)train(corpus.spans, provider, quick_config());
    for (std::size_t i = 0; i < probes.size(); ++i) CHECK(provider.embed_sparse(probes[i]) == before[i]);
}

TEST_CASE("trained detector separates the sentence fixture") {
    auto corpus = testing::make_sentence_corpus(150, 17);
    HashedNgramProvider provider(1024);
    TrainConfig cfg = quick_config();
    cfg.epochs = 6;
    ClassifierHead head = train(corpus.spans, provider, cfg);

    CHECK(score(head, provider, "The leaves are alternate.") > 0.5);
    CHECK(score(head, provider, "Metropolitan France was settled during the Iron Age by Celtic tribes.") <
          0.5);
    // no crash on an empty sentence; scoring stays defined
    double empty_score = score(head, provider, "");
    CHECK(std::isfinite(empty_score));
}

TEST_CASE("filter_descriptive keeps order and honors threshold edges") {
    auto corpus = testing::make_sentence_corpus(80, 19);
    HashedNgramProvider provider(512);
    ClassifierHead head = train(corpus.spans, provider, quick_config());

    std::vector<std::string> sentences{
        "The leaves are alternate and oblong.",
        "Once ivy is established it is very difficult to control or eradicate.",
        "The flowers are small with five white petals.",
    };
    auto all = filter_descriptive(sentences, head, provider, 0.0);
    REQUIRE(all.size() == sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) CHECK(all[i].sentence == sentences[i]);

    auto none = filter_descriptive(sentences, head, provider, 1.0 + 1e-9);
    CHECK(none.empty());

    auto some = filter_descriptive(sentences, head, provider, 0.5);
    for (const ScoredSentence& s : some) CHECK(s.score >= 0.5);
}

TEST_CASE("evaluate_detector counts per class") {
    auto corpus = testing::make_sentence_corpus(100, 23);
    HashedNgramProvider provider(512);
    ClassifierHead head = train(corpus.spans, provider, quick_config());
    auto test = testing::make_sentence_corpus(30, 29);
    DetectorEval eval = evaluate_detector(head, provider, test.spans);
    CHECK(eval.descriptive.count == 30);
    CHECK(eval.non_descriptive.count == 30);
    CHECK(eval.descriptive.f1 > 0.9);
    CHECK(eval.non_descriptive.f1 > 0.9);

    std::string csv = detector_report_csv({{"Val.", eval}, {"Test", eval}});
    CHECK(csv.find("class,Val. precision,Val. recall,Val. f1,Val. sentences,Test precision") == 0);
    CHECK(csv.find("Non-descriptive") != std::string::npos);
    CHECK(csv.find("Descriptive") != std::string::npos);
}

TEST_CASE("model container round-trips through disk") {
    auto corpus = testing::make_sentence_corpus(40, 31);
    HashedNgramProvider provider(256, 777);
    ClassifierHead head = train(corpus.spans, provider, quick_config());

    DetectorModel model;
    model.head = head;
    model.threshold = 0.6;
    model.embedding_dim = 256;
    model.hash_seed = 777;

    auto tmp = std::filesystem::temp_directory_path() / "florafill_model_test.bin";
    model.save(tmp);
    DetectorModel loaded = DetectorModel::load(tmp);
    CHECK(loaded.embedding_dim == 256);
    CHECK(loaded.hash_seed == 777);
    CHECK(loaded.threshold == 0.6);
    CHECK(loaded.head.w1() == head.w1());
    CHECK(loaded.head.b2() == head.b2());

    auto reloaded_provider = loaded.make_provider();
    CHECK(score(loaded.head, *reloaded_provider, "The leaves are alternate.") ==
          score(head, provider, "The leaves are alternate."));

    std::filesystem::remove(tmp);
}

TEST_CASE("loading a non-model file fails cleanly") {
    auto tmp = std::filesystem::temp_directory_path() / "florafill_not_a_model.bin";
    write_file(tmp, "definitely not a model");
    CHECK_THROWS_AS(DetectorModel::load(tmp), Error);
    std::filesystem::remove(tmp);
}

TEST_CASE("mismatched embedding dimension is an error") {
    ClassifierHead head(64, 0.0, 1);
    HashedNgramProvider provider(128);
    SparseVec x = provider.embed_sparse("a sentence with several tokens inside");
    CHECK_THROWS_AS((void)head.forward_sparse(x), DimensionMismatchError);
}

TEST_CASE("hashed provider is unit-norm and deterministic") {
    HashedNgramProvider provider(4096);
    SparseVec v = provider.embed_sparse("The leaves are alternate");
    double norm = 0;
    for (const auto& [_, val] : v) norm += val * val;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(provider.embed_sparse("The leaves are alternate") == v);
    CHECK(provider.embed_sparse("").empty());
    // token path and text path agree
    CHECK(provider.embed_sparse_tokens(tokenize("The leaves are alternate")) == v);
}

TEST_CASE("external vector provider looks up precomputed embeddings") {
    auto tmp = std::filesystem::temp_directory_path() / "florafill_vectors.jsonl";
    write_file(tmp,
               "{\"text\": \"The leaves are alternate\", \"vector\": [0.5, 0.0, 0.5]}\n"
               "{\"text\": \"history of the REGION\", \"vector\": [0.0, 1.0, 0.0]}\n");
    ExternalVectorProvider provider = ExternalVectorProvider::load(tmp);
    CHECK(provider.dim() == 3);
    // lookup is exact after whitespace collapsing and case folding
    auto v = provider.embed("the LEAVES are  alternate");
    CHECK(v == std::vector<double>{0.5, 0.0, 0.5});
    CHECK(provider.embed("History of the region")[1] == 1.0);
    CHECK_THROWS_AS(provider.embed("unknown text"), Error);
    std::filesystem::remove(tmp);

    auto bad = std::filesystem::temp_directory_path() / "florafill_vectors_bad.jsonl";
    write_file(bad,
               "{\"text\": \"a\", \"vector\": [1.0, 0.0]}\n"
               "{\"text\": \"b\", \"vector\": [1.0]}\n");
    CHECK_THROWS_AS(ExternalVectorProvider::load(bad), Error);
    std::filesystem::remove(bad);
}
