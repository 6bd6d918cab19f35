#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "florafill/detector.hpp"
#include "florafill/evaluation.hpp"
#include "florafill/extractor.hpp"
#include "florafill/matrix.hpp"
#include "florafill/search.hpp"
#include "florafill/text.hpp"

namespace py = pybind11;
using namespace florafill;

namespace {

std::array<double, 2> to_pair(const std::vector<double>& v, const char* name) {
    if (v.size() != 2) throw Error(std::string(name) + " must have exactly 2 entries");
    return {v[0], v[1]};
}

// Thin trainable wrapper so python callers can exercise the full
// embed -> train -> score path without touching files.
class PyDetector {
public:
    PyDetector(const std::vector<std::pair<std::string, std::string>>& corpus, std::size_t dim,
               double beta, double learning_rate, std::size_t batch_size, std::size_t epochs,
               std::uint64_t seed)
        : provider_(dim) {
        std::vector<LabeledSpan> spans;
        spans.reserve(corpus.size());
        for (const auto& [text, label] : corpus) {
            LabeledSpan span;
            span.tokens = tokenize(text);
            span.label = span_label_from_string(label);
            spans.push_back(std::move(span));
        }
        TrainConfig cfg;
        cfg.beta = beta;
        cfg.learning_rate = learning_rate;
        cfg.batch_size = batch_size;
        cfg.epochs = epochs;
        cfg.seed = seed;
        head_ = train(spans, provider_, cfg);
    }

    double score_text(const std::string& sentence) const {
        return score(head_, provider_, sentence);
    }

private:
    HashedNgramProvider provider_;
    ClassifierHead head_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Core operations for filling species-trait matrices from web text";

    py::register_exception<Error>(m, "FlorafillError");

    py::class_<TraitSchema>(m, "TraitSchema")
        .def_static("from_json", &TraitSchema::from_json, py::arg("json_text"))
        .def("to_json", &TraitSchema::to_json, py::arg("indent") = -1)
        .def("slice", &TraitSchema::slice, py::arg("trait_name"))
        .def("__len__", &TraitSchema::size)
        .def("trait_names", [](const TraitSchema& s) {
            std::vector<std::string> names;
            for (const Trait& t : s.traits()) names.push_back(t.name);
            return names;
        })
        .def("values", [](const TraitSchema& s, const std::string& trait) {
            return s.at(s.require_trait(trait)).values;
        });

    py::class_<SpeciesTraitMatrix>(m, "SpeciesTraitMatrix")
        .def_property_readonly("species", &SpeciesTraitMatrix::species)
        .def("to_csv", &SpeciesTraitMatrix::to_csv)
        .def_static("from_csv",
                    [](const std::string& text) { return SpeciesTraitMatrix::from_csv(text).matrix; })
        .def("coverage", [](const SpeciesTraitMatrix& m) { return coverage(m); })
        .def(
            "decode_species",
            [](const SpeciesTraitMatrix& m, std::size_t species_idx) {
                std::vector<std::pair<std::string, std::vector<std::string>>> out;
                for (TraitChoice& choice : m.decode_species(species_idx))
                    out.emplace_back(std::move(choice.trait), std::move(choice.values));
                return out;
            },
            py::arg("species_idx"))
        .def("__eq__", [](const SpeciesTraitMatrix& a, const SpeciesTraitMatrix& b) { return a == b; });

    m.def(
        "binary_encode",
        [](const std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::vector<std::string>>>>>& annotations,
           const TraitSchema& schema) {
            std::vector<SpeciesAnnotation> anns;
            for (const auto& [species, choices] : annotations) {
                SpeciesAnnotation a;
                a.species = species;
                for (const auto& [trait, values] : choices) a.choices.push_back({trait, values});
                anns.push_back(std::move(a));
            }
            return binary_encode(anns, schema);
        },
        py::arg("annotations"), py::arg("schema"),
        "Encode per-species (trait, values) annotations into a binary matrix");

    m.def("coverage", [](const SpeciesTraitMatrix& m) { return coverage(m); });

    m.def("split_sentences",
          [](const std::string& text) { return split_sentences(text); });
    m.def("tokenize", [](const std::string& text) { return tokenize(text); });

    m.def(
        "soft_bootstrap_loss",
        [](const std::vector<double>& q, const std::vector<double>& t, double beta) {
            return soft_bootstrap_loss(to_pair(q, "q"), to_pair(t, "t"), beta);
        },
        py::arg("q"), py::arg("t"), py::arg("beta"));

    m.def("build_query", &build_query, py::arg("binomial"));
    m.def("strip_authority", &strip_authority, py::arg("species_line"));

    m.def(
        "build_prompt",
        [](const std::string& species, const std::vector<std::pair<std::string, double>>& sentences,
           const TraitSchema& slice) {
            std::vector<ScoredSentence> scored;
            for (const auto& [text, score] : sentences) scored.push_back({species, "", text, score});
            return build_prompt(species, scored, slice).rendered;
        },
        py::arg("species"), py::arg("sentences"), py::arg("schema_slice"));

    py::class_<ExtractionResult>(m, "ExtractionResult")
        .def_readonly("hallucination_count", &ExtractionResult::hallucination_count)
        .def("pairs", [](const ExtractionResult& r) {
            std::vector<std::pair<std::string, std::vector<std::pair<std::string, int>>>> out;
            for (const TraitEvidence& te : r.traits) {
                std::vector<std::pair<std::string, int>> values;
                for (const auto& [v, bit] : te.values) values.emplace_back(v, int(bit));
                out.emplace_back(te.trait, std::move(values));
            }
            return out;
        });

    m.def("parse_response", &parse_response, py::arg("raw"), py::arg("schema_slice"));

    m.def(
        "extraction_to_matrix",
        [](const std::vector<ExtractionResult>& results, const TraitSchema& schema,
           const std::string& species) {
            std::vector<ExtractionResult> named = results;
            for (ExtractionResult& r : named)
                if (r.species.empty()) r.species = species;
            MatrixRow row = to_matrix_row(named, schema);
            row.species = species;
            return rows_to_matrix({row}, schema);
        },
        py::arg("results"), py::arg("schema"), py::arg("species"));

    py::class_<EvalReport>(m, "EvalReport")
        .def_readonly("precision", &EvalReport::precision)
        .def_readonly("recall", &EvalReport::recall)
        .def_readonly("f1", &EvalReport::f1)
        .def_readonly("coverage", &EvalReport::coverage)
        .def("to_json", &EvalReport::to_json, py::arg("indent") = 2);

    m.def("score_matrix", &score_matrix, py::arg("pred"), py::arg("ref"));

    m.def(
        "cooccurrence",
        [](const SpeciesTraitMatrix& matrix, const std::string& trait) {
            CooccurrenceMatrix c = cooccurrence(matrix, trait);
            return std::make_pair(c.labels, c.counts);
        },
        py::arg("matrix"), py::arg("trait"));
    m.def(
        "cross_cooccurrence",
        [](const SpeciesTraitMatrix& ref, const SpeciesTraitMatrix& pred, const std::string& trait) {
            CooccurrenceMatrix c = cross_cooccurrence(ref, pred, trait);
            return std::make_pair(c.labels, c.counts);
        },
        py::arg("ref"), py::arg("pred"), py::arg("trait"));

    py::class_<ConfusionReport>(m, "ConfusionReport")
        .def_property_readonly("positive_f1", [](const ConfusionReport& r) { return r.positive.f1; })
        .def_property_readonly("negative_f1", [](const ConfusionReport& r) { return r.negative.f1; })
        .def_readonly("macro_f1", &ConfusionReport::macro_f1);

    m.def(
        "binary_confusion",
        [](const std::vector<std::pair<bool, bool>>& gt_llm_pairs) {
            std::vector<FnStudyRecord> records;
            for (const auto& [gt, llm] : gt_llm_pairs) {
                FnStudyRecord r;
                r.trait = "trait";
                r.species = "species";
                r.snippet = "snippet";
                r.gt_found = gt;
                r.llm_found = llm;
                records.push_back(std::move(r));
            }
            return binary_confusion(records);
        },
        py::arg("gt_llm_pairs"), "Confusion metrics from (gt_found, llm_found) pairs");

    py::class_<PyDetector>(m, "Detector")
        .def(py::init<const std::vector<std::pair<std::string, std::string>>&, std::size_t, double,
                      double, std::size_t, std::size_t, std::uint64_t>(),
             py::arg("corpus"), py::arg("dim") = 1024, py::arg("beta") = 0.2,
             py::arg("learning_rate") = 1e-2, py::arg("batch_size") = 32, py::arg("epochs") = 5,
             py::arg("seed") = 42)
        .def("score", &PyDetector::score_text, py::arg("sentence"));

#ifdef FLORAFILL_VERSION
    m.attr("__version__") = FLORAFILL_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
