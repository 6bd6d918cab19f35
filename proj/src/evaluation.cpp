#include "florafill/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "florafill/csv.hpp"

namespace florafill {

namespace {
using ordered_json = nlohmann::ordered_json;

double safe_div(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic_f1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return std::string(buf);
}

// Alignment of ref onto pred's species/trait/value order, by canonical name.
struct Alignment {
    std::vector<std::size_t> species;                  // pred row -> ref row
    std::vector<std::size_t> trait;                    // pred trait -> ref trait
    std::vector<std::vector<std::size_t>> value;       // pred (trait, value) -> ref value
};

Alignment align(const SpeciesTraitMatrix& pred, const SpeciesTraitMatrix& ref) {
    if (pred.species().size() != ref.species().size())
        throw SchemaMismatchError("species lists differ in size (" +
                                  std::to_string(pred.species().size()) + " vs " +
                                  std::to_string(ref.species().size()) + ")");
    if (pred.schema().size() != ref.schema().size())
        throw SchemaMismatchError("trait lists differ in size");

    Alignment out;
    out.species.reserve(pred.species().size());
    for (const std::string& name : pred.species()) {
        auto idx = ref.species_index(name);
        if (!idx) throw SchemaMismatchError("species \"" + name + "\" missing from reference");
        out.species.push_back(*idx);
    }
    out.trait.reserve(pred.schema().size());
    out.value.resize(pred.schema().size());
    for (std::size_t t = 0; t < pred.schema().size(); ++t) {
        const Trait& trait = pred.schema().at(t);
        auto rt = ref.schema().trait_index(trait.name);
        if (!rt) throw SchemaMismatchError("trait \"" + trait.name + "\" missing from reference");
        if (ref.schema().at(*rt).values.size() != trait.values.size())
            throw SchemaMismatchError("value lists differ for trait \"" + trait.name + "\"");
        out.trait.push_back(*rt);
        for (const std::string& value : trait.values) {
            auto rv = ref.schema().value_index(*rt, value);
            if (!rv)
                throw SchemaMismatchError("value \"" + value + "\" of trait \"" + trait.name +
                                          "\" missing from reference");
            out.value[t].push_back(*rv);
        }
    }
    return out;
}

}  // namespace

std::vector<TraitScore> per_trait_scores(const SpeciesTraitMatrix& pred,
                                         const SpeciesTraitMatrix& ref) {
    Alignment a = align(pred, ref);
    std::vector<TraitScore> scores;
    scores.reserve(pred.schema().size());
    for (std::size_t t = 0; t < pred.schema().size(); ++t) {
        TraitScore score;
        score.trait = pred.schema().at(t).name;
        std::size_t covered = 0;
        for (std::size_t s = 0; s < pred.species().size(); ++s) {
            const TraitCell& pc = pred.cell(s, t);
            if (pc.na) continue;
            ++covered;
            const TraitCell& rc = ref.cell(a.species[s], a.trait[t]);
            if (rc.na) continue;  // unverifiable
            ++score.evaluated_cells;
            for (std::size_t v = 0; v < pc.bits.size(); ++v) {
                bool p = pc.bits[v] != 0;
                bool r = rc.bits[a.value[t][v]] != 0;
                if (p && r) ++score.counts.tp;
                else if (p && !r) ++score.counts.fp;
                else if (!p && r) ++score.counts.fn;
            }
        }
        score.coverage = safe_div(covered, pred.species().size());
        score.precision = safe_div(score.counts.tp, score.counts.tp + score.counts.fp);
        score.recall = safe_div(score.counts.tp, score.counts.tp + score.counts.fn);
        score.f1 = harmonic_f1(score.precision, score.recall);
        scores.push_back(std::move(score));
    }
    return scores;
}

EvalReport score_matrix(const SpeciesTraitMatrix& pred, const SpeciesTraitMatrix& ref) {
    Alignment a = align(pred, ref);
    EvalReport report;
    report.per_trait = per_trait_scores(pred, ref);

    for (const TraitScore& ts : report.per_trait) {
        report.counts.tp += ts.counts.tp;
        report.counts.fp += ts.counts.fp;
        report.counts.fn += ts.counts.fn;
    }
    std::size_t covered = pred.covered_count();
    for (std::size_t s = 0; s < pred.species().size(); ++s)
        for (std::size_t t = 0; t < pred.schema().size(); ++t)
            if (!pred.cell(s, t).na && ref.cell(a.species[s], a.trait[t]).na) ++report.unverifiable;

    report.coverage = safe_div(covered, pred.cell_count());
    std::size_t evaluated = 0;
    for (const TraitScore& ts : report.per_trait) evaluated += ts.evaluated_cells;
    report.defined = evaluated > 0;
    report.precision = safe_div(report.counts.tp, report.counts.tp + report.counts.fp);
    report.recall = safe_div(report.counts.tp, report.counts.tp + report.counts.fn);
    report.f1 = harmonic_f1(report.precision, report.recall);

    std::size_t macro_n = 0;
    for (const TraitScore& ts : report.per_trait) {
        if (ts.evaluated_cells == 0) continue;
        ++macro_n;
        report.macro_precision += ts.precision;
        report.macro_recall += ts.recall;
        report.macro_f1 += ts.f1;
    }
    if (macro_n > 0) {
        report.macro_precision /= static_cast<double>(macro_n);
        report.macro_recall /= static_cast<double>(macro_n);
        report.macro_f1 /= static_cast<double>(macro_n);
    }
    return report;
}

std::string EvalReport::to_json(int indent) const {
    ordered_json doc;
    doc["precision"] = precision;
    doc["recall"] = recall;
    doc["f1"] = f1;
    doc["coverage"] = coverage;
    doc["defined"] = defined;
    doc["counts"] = {{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}};
    doc["unverifiable"] = unverifiable;
    doc["macro"] = {{"precision", macro_precision}, {"recall", macro_recall}, {"f1", macro_f1}};
    ordered_json traits = ordered_json::array();
    for (const TraitScore& ts : per_trait) {
        traits.push_back({{"trait", ts.trait},
                          {"precision", ts.precision},
                          {"recall", ts.recall},
                          {"f1", ts.f1},
                          {"coverage", ts.coverage},
                          {"tp", ts.counts.tp},
                          {"fp", ts.counts.fp},
                          {"fn", ts.counts.fn}});
    }
    doc["per_trait"] = std::move(traits);
    return doc.dump(indent) + "\n";
}

std::string EvalReport::to_text() const {
    std::ostringstream out;
    out << "Precision  Recall  F1      Coverage\n";
    out << fmt4(precision) << "     " << fmt4(recall) << "  " << fmt4(f1) << "  " << fmt4(coverage)
        << "\n";
    if (!defined) out << "(no verifiable predicted cells; accuracy metrics are vacuous)\n";
    out << "\ncounts: TP=" << counts.tp << " FP=" << counts.fp << " FN=" << counts.fn
        << " unverifiable_cells=" << unverifiable << "\n";
    out << "macro over traits: P=" << fmt4(macro_precision) << " R=" << fmt4(macro_recall)
        << " F1=" << fmt4(macro_f1) << "\n";
    return out.str();
}

std::string per_trait_csv(const std::vector<TraitScore>& scores) {
    std::string out = csv::write_row({"trait", "precision", "recall", "f1", "coverage", "tp", "fp", "fn"});
    for (const TraitScore& ts : scores) {
        out += csv::write_row({ts.trait, fmt4(ts.precision), fmt4(ts.recall), fmt4(ts.f1),
                               fmt4(ts.coverage), std::to_string(ts.counts.tp),
                               std::to_string(ts.counts.fp), std::to_string(ts.counts.fn)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Co-occurrence
// ---------------------------------------------------------------------------

CooccurrenceMatrix cooccurrence(const SpeciesTraitMatrix& matrix, std::string_view trait) {
    std::size_t t = matrix.schema().require_trait(trait);
    CooccurrenceMatrix out;
    out.trait = matrix.schema().at(t).name;
    out.labels = matrix.schema().at(t).values;
    out.kind = CooccurrenceKind::annotation_annotation;
    std::size_t n = out.labels.size();
    out.counts.assign(n, std::vector<std::size_t>(n, 0));
    for (std::size_t s = 0; s < matrix.species().size(); ++s) {
        const TraitCell& cell = matrix.cell(s, t);
        if (cell.na) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (!cell.bits[i]) continue;
            for (std::size_t j = 0; j < n; ++j)
                if (cell.bits[j]) ++out.counts[i][j];
        }
    }
    return out;
}

CooccurrenceMatrix cross_cooccurrence(const SpeciesTraitMatrix& ref, const SpeciesTraitMatrix& pred,
                                      std::string_view trait) {
    Alignment a = align(pred, ref);
    std::size_t pt = pred.schema().require_trait(trait);
    std::size_t rt = a.trait[pt];

    CooccurrenceMatrix out;
    out.trait = pred.schema().at(pt).name;
    out.labels = ref.schema().at(rt).values;
    out.kind = CooccurrenceKind::annotation_prediction;
    std::size_t n = out.labels.size();
    out.counts.assign(n, std::vector<std::size_t>(n, 0));

    for (std::size_t s = 0; s < pred.species().size(); ++s) {
        const TraitCell& pc = pred.cell(s, pt);
        const TraitCell& rc = ref.cell(a.species[s], rt);
        if (pc.na || rc.na) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (!rc.bits[i]) continue;
            // rows: annotations; columns: predictions
            for (std::size_t jp = 0; jp < n; ++jp) {
                if (!pc.bits[jp]) continue;
                std::size_t j = a.value[pt][jp];
                ++out.counts[i][j];
            }
        }
    }
    return out;
}

std::string CooccurrenceMatrix::to_csv() const {
    std::vector<std::string> header{trait};
    for (const std::string& l : labels) header.push_back(l);
    std::string out = csv::write_row(header);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::vector<std::string> row{labels[i]};
        for (std::size_t j = 0; j < labels.size(); ++j) row.push_back(std::to_string(counts[i][j]));
        out += csv::write_row(row);
    }
    return out;
}

std::string CooccurrenceMatrix::to_svg() const {
    const std::size_t n = labels.size();
    const int cell = 28, margin = 140, legend = 16;
    std::size_t max_count = 1;
    for (const auto& row : counts)
        for (std::size_t c : row) max_count = std::max(max_count, c);

    std::ostringstream svg;
    int width = margin + static_cast<int>(n) * cell + 10;
    int height = margin + static_cast<int>(n) * cell + 10;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\">\n";
    svg << "<text x=\"4\" y=\"14\" font-size=\"" << legend << "\">" << trait << "</text>\n";
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double intensity = static_cast<double>(counts[i][j]) / static_cast<double>(max_count);
            int shade = 255 - static_cast<int>(std::lround(205.0 * intensity));
            int x = margin + static_cast<int>(j) * cell;
            int y = margin + static_cast<int>(i) * cell;
            svg << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell << "\" height=\""
                << cell << "\" fill=\"rgb(" << shade << ",255," << shade
                << ")\" stroke=\"#999\"/>\n";
            svg << "<text x=\"" << x + cell / 2 << "\" y=\"" << y + cell / 2 + 4
                << "\" font-size=\"10\" text-anchor=\"middle\">" << counts[i][j] << "</text>\n";
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        svg << "<text x=\"" << margin - 6 << "\" y=\"" << margin + static_cast<int>(i) * cell + cell / 2 + 4
            << "\" font-size=\"10\" text-anchor=\"end\">" << labels[i] << "</text>\n";
        svg << "<text x=\"" << margin + static_cast<int>(i) * cell + cell / 2 << "\" y=\""
            << margin - 6 << "\" font-size=\"10\" text-anchor=\"start\" transform=\"rotate(-60 "
            << margin + static_cast<int>(i) * cell + cell / 2 << " " << margin - 6 << ")\">"
            << labels[i] << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

// ---------------------------------------------------------------------------
// False-negative study
// ---------------------------------------------------------------------------

ConfusionReport binary_confusion(const std::vector<FnStudyRecord>& records) {
    if (records.empty()) throw EmptyStudyError();
    ConfusionReport report;
    for (const FnStudyRecord& r : records) {
        if (r.gt_found && r.llm_found) ++report.gt_found_llm_found;
        else if (r.gt_found && !r.llm_found) ++report.gt_found_llm_missing;
        else if (!r.gt_found && r.llm_found) ++report.gt_missing_llm_found;
        else ++report.gt_missing_llm_missing;
    }
    // positive class: "found"
    std::size_t tp = report.gt_found_llm_found;
    std::size_t fp = report.gt_missing_llm_found;
    std::size_t fn = report.gt_found_llm_missing;
    std::size_t tn = report.gt_missing_llm_missing;
    report.positive.precision = safe_div(tp, tp + fp);
    report.positive.recall = safe_div(tp, tp + fn);
    report.positive.f1 = harmonic_f1(report.positive.precision, report.positive.recall);
    report.negative.precision = safe_div(tn, tn + fn);
    report.negative.recall = safe_div(tn, tn + fp);
    report.negative.f1 = harmonic_f1(report.negative.precision, report.negative.recall);
    report.macro_f1 = (report.positive.f1 + report.negative.f1) / 2.0;
    return report;
}

std::string ConfusionReport::to_json(int indent) const {
    ordered_json doc;
    doc["counts"] = {{"gt_missing_llm_missing", gt_missing_llm_missing},
                     {"gt_missing_llm_found", gt_missing_llm_found},
                     {"gt_found_llm_missing", gt_found_llm_missing},
                     {"gt_found_llm_found", gt_found_llm_found}};
    doc["positive"] = {{"precision", positive.precision},
                       {"recall", positive.recall},
                       {"f1", positive.f1}};
    doc["negative"] = {{"precision", negative.precision},
                       {"recall", negative.recall},
                       {"f1", negative.f1}};
    doc["macro_f1"] = macro_f1;
    return doc.dump(indent) + "\n";
}

std::string ConfusionReport::to_text() const {
    std::ostringstream out;
    out << "                LLM Missing  LLM Found  Total\n";
    out << "GT Missing      " << gt_missing_llm_missing << "  " << gt_missing_llm_found << "  "
        << (gt_missing_llm_missing + gt_missing_llm_found) << "\n";
    out << "GT Found        " << gt_found_llm_missing << "  " << gt_found_llm_found << "  "
        << (gt_found_llm_missing + gt_found_llm_found) << "\n";
    out << "positive class: P=" << fmt4(positive.precision) << " R=" << fmt4(positive.recall)
        << " F1=" << fmt4(positive.f1) << "\n";
    out << "negative class: P=" << fmt4(negative.precision) << " R=" << fmt4(negative.recall)
        << " F1=" << fmt4(negative.f1) << "\n";
    out << "macro F1: " << fmt4(macro_f1) << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Snippet selection
// ---------------------------------------------------------------------------

namespace {
double cosine_distance(const SparseVec& a, const SparseVec& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first == b[j].first) {
            dot += a[i].second * b[j].second;
            ++i;
            ++j;
        } else if (a[i].first < b[j].first) {
            ++i;
        } else {
            ++j;
        }
    }
    for (const auto& [_, v] : a) na += v * v;
    for (const auto& [_, v] : b) nb += v * v;
    if (na == 0.0 || nb == 0.0) return 1.0;
    return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}
}  // namespace

std::vector<ScoredSentence> select_snippets(std::string_view trait,
                                            const std::vector<std::string>& species_pool,
                                            const std::vector<ScoredSentence>& sentence_store,
                                            const EmbeddingProvider& provider, std::size_t k) {
    SparseVec trait_vec = provider.embed_sparse(trait);
    struct Candidate {
        double distance;
        const ScoredSentence* sentence;
    };
    std::vector<Candidate> candidates;
    for (const ScoredSentence& s : sentence_store) {
        if (!species_pool.empty()) {
            bool in_pool = false;
            for (const std::string& sp : species_pool)
                in_pool = in_pool || canonical_key(sp) == canonical_key(s.species);
            if (!in_pool) continue;
        }
        candidates.push_back({cosine_distance(trait_vec, provider.embed_sparse(s.sentence)), &s});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        if (a.sentence->species != b.sentence->species) return a.sentence->species < b.sentence->species;
        if (a.sentence->url != b.sentence->url) return a.sentence->url < b.sentence->url;
        return a.sentence->sentence < b.sentence->sentence;
    });
    std::vector<ScoredSentence> out;
    for (std::size_t i = 0; i < candidates.size() && i < k; ++i) out.push_back(*candidates[i].sentence);
    return out;
}

std::vector<FnStudyInput> load_fn_study_csv(const std::filesystem::path& path) {
    auto rows = csv::parse(read_file(path));
    if (rows.empty()) throw Error("fn-study csv: empty file");
    std::vector<FnStudyInput> out;
    std::size_t first = 0;
    if (!rows[0].empty() && canonical_key(rows[0][0]) == "trait") first = 1;  // header row
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() < 4)
            throw Error("fn-study csv: row " + std::to_string(r + 1) +
                        " needs trait, species, snippet, expert_verdict");
        FnStudyInput record;
        record.trait = row[0];
        record.species = row[1];
        record.snippet = row[2];
        std::string verdict = canonical_key(row[3]);
        if (verdict == "can_infer") record.can_infer = true;
        else if (verdict == "cannot_infer") record.can_infer = false;
        else throw Error("fn-study csv: bad expert_verdict \"" + row[3] + "\"");
        out.push_back(std::move(record));
    }
    return out;
}

}  // namespace florafill
