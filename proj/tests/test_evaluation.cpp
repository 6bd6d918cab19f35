#include <doctest.h>

#include "florafill/evaluation.hpp"

using namespace florafill;

namespace {

SpeciesTraitMatrix matrix_of(const TraitSchema& schema,
                             const std::vector<SpeciesAnnotation>& annotations) {
    return binary_encode(annotations, schema);
}

// Independent recount used as the oracle for criterion-style checks: walks
// every species/trait/value triple with plain loops over decoded cells.
struct BruteCounts {
    std::size_t tp = 0, fp = 0, fn = 0, covered = 0, unverifiable = 0;
};

BruteCounts brute_force(const SpeciesTraitMatrix& pred, const SpeciesTraitMatrix& ref) {
    BruteCounts counts;
    for (std::size_t s = 0; s < pred.species().size(); ++s) {
        std::size_t rs = *ref.species_index(pred.species()[s]);
        for (std::size_t t = 0; t < pred.schema().size(); ++t) {
            std::size_t rt = *ref.schema().trait_index(pred.schema().at(t).name);
            const TraitCell& pc = pred.cell(s, t);
            if (pc.na) continue;
            ++counts.covered;
            const TraitCell& rc = ref.cell(rs, rt);
            if (rc.na) {
                ++counts.unverifiable;
                continue;
            }
            for (std::size_t v = 0; v < pred.schema().at(t).values.size(); ++v) {
                std::size_t rv = *ref.schema().value_index(rt, pred.schema().at(t).values[v]);
                bool p = pc.bits[v] != 0;
                bool r = rc.bits[rv] != 0;
                counts.tp += p && r;
                counts.fp += p && !r;
                counts.fn += !p && r;
            }
        }
    }
    return counts;
}

TraitSchema abc_schema() { return TraitSchema({{"T", {"A", "B", "C"}}}); }

}  // namespace

TEST_CASE("identical fully covered matrices score perfectly") {
    TraitSchema schema({{"T1", {"A", "B"}}, {"T2", {"X", "Y"}}});
    auto m = matrix_of(schema, {{"S one", {{"T1", {"A"}}, {"T2", {"Y"}}}},
                               {"S two", {{"T1", {"B"}}, {"T2", {"X", "Y"}}}}});
    EvalReport r = score_matrix(m, m);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.coverage == 1.0);
    CHECK(r.defined);
    CHECK(r.unverifiable == 0);
}

TEST_CASE("worked micro-count example: ref [1,1,0] vs pred [1,0,1]") {
    auto ref = matrix_of(abc_schema(), {{"S one", {{"T", {"A", "B"}}}}});
    auto pred = matrix_of(abc_schema(), {{"S one", {{"T", {"A", "C"}}}}});
    EvalReport r = score_matrix(pred, ref);
    CHECK(r.counts.tp == 1);
    CHECK(r.counts.fp == 1);
    CHECK(r.counts.fn == 1);
    CHECK(r.precision == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("all-NA prediction: zero coverage, metrics vacuous") {
    TraitSchema schema = abc_schema();
    MatrixBuilder builder(schema);
    builder.add_species("S one");
    SpeciesTraitMatrix pred = std::move(builder).build();
    auto ref = matrix_of(schema, {{"S one", {{"T", {"A"}}}}});
    EvalReport r = score_matrix(pred, ref);
    CHECK(r.coverage == 0.0);
    CHECK_FALSE(r.defined);
    CHECK(r.precision == 0.0);
    CHECK(r.recall == 0.0);
    CHECK(r.f1 == 0.0);
    CHECK(r.counts.tp + r.counts.fp + r.counts.fn == 0);
}

TEST_CASE("cells NA in the reference are unverifiable, not errors") {
    TraitSchema schema = abc_schema();
    auto pred = matrix_of(schema, {{"S one", {{"T", {"A"}}}}});
    MatrixBuilder ref_builder(schema);
    ref_builder.add_species("S one");  // reference NA
    auto ref = std::move(ref_builder).build();
    EvalReport r = score_matrix(pred, ref);
    CHECK(r.unverifiable == 1);
    CHECK_FALSE(r.defined);
    CHECK(r.coverage == 1.0);
}

TEST_CASE("score_matrix requires aligned inputs") {
    auto a = matrix_of(abc_schema(), {{"S one", {{"T", {"A"}}}}});
    auto b = matrix_of(abc_schema(), {{"S other", {{"T", {"A"}}}}});
    CHECK_THROWS_AS(score_matrix(a, b), SchemaMismatchError);
    auto c = matrix_of(TraitSchema({{"Other", {"A", "B"}}}), {{"S one", {{"Other", {"A"}}}}});
    CHECK_THROWS_AS(score_matrix(a, c), SchemaMismatchError);
}

TEST_CASE("score_matrix is permutation-invariant and matches brute force") {
    TraitSchema schema({{"T1", {"a", "b", "c"}}, {"T2", {"x", "y"}}, {"T3", {"p", "q", "r"}}});
    TraitSchema permuted({{"T3", {"r", "p", "q"}}, {"T1", {"c", "a", "b"}}, {"T2", {"y", "x"}}});
    Rng rng(31337);

    auto random_matrix = [&](const TraitSchema& s, const std::vector<std::string>& species) {
        MatrixBuilder builder(s);
        for (const std::string& name : species) {
            std::size_t row = builder.add_species(name);
            for (std::size_t t = 0; t < s.size(); ++t) {
                if (rng.next_double() < 0.3) continue;
                std::vector<std::uint8_t> bits(s.at(t).values.size(), 0);
                for (auto& bset : bits) bset = rng.next_double() < 0.45 ? 1 : 0;
                builder.set_cell(row, t, bits);
            }
        }
        return std::move(builder).build();
    };

    std::vector<std::string> species{"S one", "S two", "S three", "S four"};
    for (int iter = 0; iter < 40; ++iter) {
        SpeciesTraitMatrix pred = random_matrix(schema, species);
        SpeciesTraitMatrix ref = random_matrix(schema, species);

        EvalReport r = score_matrix(pred, ref);
        BruteCounts oracle = brute_force(pred, ref);
        CHECK(r.counts.tp == oracle.tp);
        CHECK(r.counts.fp == oracle.fp);
        CHECK(r.counts.fn == oracle.fn);
        CHECK(r.unverifiable == oracle.unverifiable);
        CHECK(r.coverage ==
              doctest::Approx(double(oracle.covered) / double(pred.cell_count())).epsilon(1e-12));

        // rebuild the reference with permuted species/trait/value order
        std::vector<std::string> rev(species.rbegin(), species.rend());
        MatrixBuilder builder(permuted);
        for (const std::string& name : rev) {
            std::size_t row = builder.add_species(name);
            std::size_t orig_row = *ref.species_index(name);
            for (std::size_t t = 0; t < permuted.size(); ++t) {
                const Trait& trait = permuted.at(t);
                std::size_t orig_t = *schema.trait_index(trait.name);
                const TraitCell& cell = ref.cell(orig_row, orig_t);
                if (cell.na) continue;
                std::vector<std::uint8_t> bits(trait.values.size(), 0);
                for (std::size_t v = 0; v < trait.values.size(); ++v)
                    bits[v] = cell.bits[*schema.value_index(orig_t, trait.values[v])];
                builder.set_cell(row, t, bits);
            }
        }
        SpeciesTraitMatrix ref_permuted = std::move(builder).build();
        EvalReport r2 = score_matrix(pred, ref_permuted);
        CHECK(r2.counts.tp == r.counts.tp);
        CHECK(r2.counts.fp == r.counts.fp);
        CHECK(r2.counts.fn == r.counts.fn);
        CHECK(r2.f1 == doctest::Approx(r.f1).epsilon(1e-15));

        // micro identities: TP+FN = reference positives within evaluated cells,
        // TP+FP = predicted positives within evaluated cells
        std::size_t ref_pos = 0, pred_pos = 0;
        for (std::size_t s = 0; s < pred.species().size(); ++s) {
            for (std::size_t t = 0; t < schema.size(); ++t) {
                const TraitCell& pc = pred.cell(s, t);
                std::size_t rs = *ref.species_index(pred.species()[s]);
                const TraitCell& rc = ref.cell(rs, t);
                if (pc.na || rc.na) continue;
                for (std::size_t v = 0; v < pc.bits.size(); ++v) {
                    ref_pos += rc.bits[v] != 0;
                    pred_pos += pc.bits[v] != 0;
                }
            }
        }
        CHECK(r.counts.tp + r.counts.fn == ref_pos);
        CHECK(r.counts.tp + r.counts.fp == pred_pos);
    }
}

TEST_CASE("per-trait coverage counts species with a found value") {
    TraitSchema schema({{"T1", {"a", "b"}}, {"T2", {"x", "y"}}});
    auto ref = matrix_of(schema, {{"S one", {{"T1", {"a"}}, {"T2", {"x"}}}},
                                  {"S two", {{"T1", {"b"}}, {"T2", {"y"}}}}});
    auto pred = matrix_of(schema, {{"S one", {{"T1", {"a"}}}},
                                   {"S two", {{"T1", {"b"}}, {"T2", {"y"}}}}});
    auto scores = per_trait_scores(pred, ref);
    REQUIRE(scores.size() == 2);
    CHECK(scores[0].coverage == 1.0);
    CHECK(scores[1].coverage == 0.5);
    CHECK(scores[0].f1 == 1.0);
}

TEST_CASE("cooccurrence of one species annotated {A, B}") {
    auto m = matrix_of(abc_schema(), {{"S one", {{"T", {"A", "B"}}}}});
    CooccurrenceMatrix c = cooccurrence(m, "T");
    CHECK(c.counts[0][0] == 1);  // A,A
    CHECK(c.counts[0][1] == 1);  // A,B
    CHECK(c.counts[1][0] == 1);  // B,A
    CHECK(c.counts[1][1] == 1);  // B,B
    std::size_t total = 0;
    for (const auto& row : c.counts)
        for (std::size_t v : row) total += v;
    CHECK(total == 4);
}

TEST_CASE("cooccurrence diagonal equals per-value counts and matrix is symmetric") {
    TraitSchema schema({{"T", {"a", "b", "c", "d"}}});
    Rng rng(5150);
    for (int iter = 0; iter < 30; ++iter) {
        MatrixBuilder builder(schema);
        std::size_t n = 2 + rng.next_below(8);
        std::vector<std::size_t> per_value(4, 0);
        for (std::size_t s = 0; s < n; ++s) {
            std::size_t row = builder.add_species("S s" + std::to_string(s));
            if (rng.next_double() < 0.25) continue;  // NA cells skipped
            std::vector<std::uint8_t> bits(4, 0);
            bool any = false;
            for (std::size_t v = 0; v < 4; ++v) {
                bits[v] = rng.next_double() < 0.5 ? 1 : 0;
                any = any || bits[v];
            }
            if (!any) continue;
            for (std::size_t v = 0; v < 4; ++v) per_value[v] += bits[v];
            builder.set_cell(row, 0, bits);
        }
        CooccurrenceMatrix c = cooccurrence(std::move(builder).build(), "T");
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(c.counts[i][i] == per_value[i]);
            for (std::size_t j = 0; j < 4; ++j) CHECK(c.counts[i][j] == c.counts[j][i]);
        }
    }
}

TEST_CASE("cross cooccurrence equals within-annotation counts when pred == ref") {
    TraitSchema schema({{"T", {"a", "b", "c"}}});
    auto m = matrix_of(schema, {{"S one", {{"T", {"a", "b"}}}},
                                {"S two", {{"T", {"b"}}}},
                                {"S three", {{"T", {"a", "c"}}}}});
    CooccurrenceMatrix within = cooccurrence(m, "T");
    CooccurrenceMatrix cross = cross_cooccurrence(m, m, "T");
    CHECK(cross.counts == within.counts);
    CHECK(cross.kind == CooccurrenceKind::annotation_prediction);
}

TEST_CASE("the observed confusion pattern: opposite predicted for multi-label truth") {
    TraitSchema schema({{"Leaf position", {"opposite", "whorls of 3", "alternate"}}});
    auto ref = matrix_of(schema, {{"S one", {{"Leaf position", {"opposite", "whorls of 3"}}}}});
    auto pred = matrix_of(schema, {{"S one", {{"Leaf position", {"opposite"}}}}});
    CooccurrenceMatrix x = cross_cooccurrence(ref, pred, "Leaf position");
    CHECK(x.counts[0][0] == 1);  // opposite x opposite
    CHECK(x.counts[1][0] == 1);  // whorls of 3 (rows: annotation) x opposite (cols: prediction)
    CHECK(x.counts[2][0] == 0);
    CHECK(x.counts[0][1] == 0);
}

TEST_CASE("cooccurrence csv and svg render") {
    auto m = matrix_of(abc_schema(), {{"S one", {{"T", {"A", "B"}}}}});
    CooccurrenceMatrix c = cooccurrence(m, "T");
    std::string csv = c.to_csv();
    CHECK(csv.find("T,A,B,C") == 0);
    std::string svg = c.to_svg();
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("confusion-matrix arithmetic on the reference counts") {
    // rebuild the records from the published counts
    std::vector<FnStudyRecord> records;
    auto add = [&](std::size_t n, bool gt, bool llm) {
        for (std::size_t i = 0; i < n; ++i) {
            FnStudyRecord r;
            r.trait = "t";
            r.species = "s";
            r.snippet = "x";
            r.gt_found = gt;
            r.llm_found = llm;
            records.push_back(r);
        }
    };
    add(856, false, false);
    add(62, false, true);
    add(94, true, false);
    add(204, true, true);

    ConfusionReport report = binary_confusion(records);
    CHECK(report.gt_missing_llm_missing == 856);
    CHECK(report.gt_missing_llm_found == 62);
    CHECK(report.gt_found_llm_missing == 94);
    CHECK(report.gt_found_llm_found == 204);

    // brute-force oracle: F1 = 2 TP / (2 TP + FP + FN) per class
    double pos_oracle = 2.0 * 204 / (2.0 * 204 + 62 + 94);
    double neg_oracle = 2.0 * 856 / (2.0 * 856 + 94 + 62);
    CHECK(report.positive.f1 == doctest::Approx(pos_oracle).epsilon(1e-12));
    CHECK(report.negative.f1 == doctest::Approx(neg_oracle).epsilon(1e-12));

    CHECK(std::abs(report.positive.f1 - 0.723) < 0.001);
    CHECK(std::abs(report.negative.f1 - 0.916) < 0.001);
    CHECK(std::abs(report.macro_f1 - 0.820) < 0.001);
}

TEST_CASE("agreeing records and the empty study") {
    std::vector<FnStudyRecord> agree;
    for (int i = 0; i < 10; ++i) {
        FnStudyRecord r;
        r.trait = "t";
        r.species = "s";
        r.snippet = "x";
        r.gt_found = i % 2 == 0;
        r.llm_found = r.gt_found;
        agree.push_back(r);
    }
    ConfusionReport report = binary_confusion(agree);
    CHECK(report.positive.f1 == 1.0);
    CHECK(report.negative.f1 == 1.0);
    CHECK(report.macro_f1 == 1.0);

    CHECK_THROWS_AS(binary_confusion({}), EmptyStudyError);
}

TEST_CASE("select_snippets ranks by cosine distance with lexicographic ties") {
    HashedNgramProvider provider(2048);
    std::vector<ScoredSentence> store{
        {"B b", "mock://2", "The fruit is a red berry.", 0.9},
        {"A a", "mock://1", "The fruit is a red berry.", 0.9},  // tie with the one above
        {"A a", "mock://1", "History of the region and its people.", 0.9},
        {"C c", "mock://3", "Fruit color varies from red to black.", 0.9},
    };
    auto top = select_snippets("fruit color", {}, store, provider, 3);
    REQUIRE(top.size() == 3);
    // the literal "fruit color" sentence is the closest
    CHECK(top[0].sentence == "Fruit color varies from red to black.");
    // the tied pair arrives in (species, url, sentence) order
    CHECK(top[1].species == "A a");
    CHECK(top[2].species == "B b");

    auto pooled = select_snippets("fruit color", {"A a"}, store, provider, 10);
    for (const auto& s : pooled) CHECK(s.species == "A a");
}
