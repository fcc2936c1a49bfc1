#pragma once

// Paper-level citation corpus: ingestion (CSV and JSONL), validation,
// document-type filtering, field queries and per-journal aggregation.
// Loaders never return a partially valid corpus; any bad row aborts the
// load with a DataError naming the offending line.

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "error.hpp"

namespace phindex {

enum class DocType { Article, Review, Other };

inline std::string_view to_string(DocType t) {
    switch (t) {
        case DocType::Article: return "article";
        case DocType::Review: return "review";
        default: return "other";
    }
}

// Case-insensitive label mapping. Unrecognized labels land in Other; *known
// is cleared for those so loaders can count them as warnings rather than
// rejecting the row.
inline DocType doc_type_from_label(std::string_view label, bool* known = nullptr) {
    std::string low(label);
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    if (known) *known = true;
    if (low == "article") return DocType::Article;
    if (low == "review") return DocType::Review;
    if (low == "other") return DocType::Other;
    if (known) *known = false;
    return DocType::Other;
}

struct Paper {
    std::string paper_id;
    std::string journal_id;
    std::uint64_t citations = 0;
    DocType doc_type = DocType::Other;
    std::vector<std::string> field_ids;  // kept sorted and unique
    bool operator==(const Paper&) const = default;
};

struct Corpus {
    std::vector<Paper> papers;
    std::map<std::string, std::string> fields;    // field_id -> display name
    std::map<std::string, std::string> journals;  // journal_id -> display name
    bool operator==(const Corpus&) const = default;
};

// Pseudo-field selecting every paper regardless of field allocation.
inline constexpr std::string_view kAllField = "ALL";

enum class CorpusFormat { Csv, Jsonl };

struct LoadReport {
    std::uint64_t papers = 0;
    std::uint64_t unknown_doc_type = 0;  // labels that fell back to Other
};

// journal_id -> extra field_ids, applied to all of a journal's papers at
// load time. Lets corpora with journal-level field allocation stay thin.
using JournalFieldMap = std::map<std::string, std::vector<std::string>>;

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace((unsigned char)s.front())) s.remove_prefix(1);
    while (!s.empty() && std::isspace((unsigned char)s.back())) s.remove_suffix(1);
    return s;
}

inline std::uint64_t parse_citations(std::string_view raw, std::size_t line) {
    const auto s = trim(raw);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw DataError("line " + std::to_string(line) +
                        ": citations must be a non-negative integer, got \"" +
                        std::string(raw) + "\"");
    return value;
}

inline std::vector<std::string> parse_field_ids(std::string_view cell) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= cell.size()) {
        const std::size_t semi = cell.find(';', start);
        const auto len = semi == std::string_view::npos ? std::string_view::npos : semi - start;
        const auto part = trim(cell.substr(start, len));
        if (!part.empty()) out.emplace_back(part);
        if (semi == std::string_view::npos) break;
        start = semi + 1;
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

class CorpusBuilder {
public:
    CorpusBuilder(LoadReport* report, const JournalFieldMap* journal_fields)
        : report_(report), journal_fields_(journal_fields) {}

    void add(Paper p, std::size_t line) {
        if (p.paper_id.empty())
            throw DataError("line " + std::to_string(line) + ": empty paper_id");
        if (p.journal_id.empty())
            throw DataError("line " + std::to_string(line) + ": empty journal_id");
        const auto [it, fresh] = seen_.emplace(p.paper_id, line);
        if (!fresh)
            throw DataError("line " + std::to_string(line) + ": duplicate paper_id \"" +
                            p.paper_id + "\" (first seen at line " +
                            std::to_string(it->second) + ")");
        if (journal_fields_) {
            const auto jt = journal_fields_->find(p.journal_id);
            if (jt != journal_fields_->end()) {
                p.field_ids.insert(p.field_ids.end(), jt->second.begin(), jt->second.end());
                std::sort(p.field_ids.begin(), p.field_ids.end());
                p.field_ids.erase(std::unique(p.field_ids.begin(), p.field_ids.end()),
                                  p.field_ids.end());
            }
        }
        corpus_.journals.emplace(p.journal_id, p.journal_id);
        for (const auto& f : p.field_ids) corpus_.fields.emplace(f, f);
        corpus_.papers.push_back(std::move(p));
        if (report_) ++report_->papers;
    }

    void count_unknown_doc_type() {
        if (report_) ++report_->unknown_doc_type;
    }

    Corpus take() { return std::move(corpus_); }

private:
    Corpus corpus_;
    std::map<std::string, std::size_t> seen_;  // paper_id -> first line
    LoadReport* report_;
    const JournalFieldMap* journal_fields_;
};

inline constexpr std::array<std::string_view, 5> kCorpusColumns = {
    "paper_id", "journal_id", "doc_type", "citations", "field_ids"};

inline Corpus load_csv(std::istream& in, LoadReport* report, const JournalFieldMap* jf) {
    csv::Reader reader(in);
    const auto header = reader.next();
    if (!header) throw DataError("empty input, expected a header row");
    if (header->fields.size() != kCorpusColumns.size())
        throw DataError("line 1: expected " + std::to_string(kCorpusColumns.size()) +
                        " header columns, got " + std::to_string(header->fields.size()));
    std::array<int, kCorpusColumns.size()> pos;
    pos.fill(-1);
    for (std::size_t i = 0; i < header->fields.size(); ++i) {
        const auto name = trim(header->fields[i]);
        const auto found = std::find(kCorpusColumns.begin(), kCorpusColumns.end(), name);
        if (found == kCorpusColumns.end())
            throw DataError("line 1: unexpected column \"" + std::string(name) + "\"");
        pos[std::size_t(found - kCorpusColumns.begin())] = int(i);
    }
    for (std::size_t i = 0; i < pos.size(); ++i)
        if (pos[i] < 0)
            throw DataError("line 1: missing column \"" + std::string(kCorpusColumns[i]) + "\"");

    CorpusBuilder builder(report, jf);
    while (const auto row = reader.next()) {
        if (row->fields.size() == 1 && trim(row->fields[0]).empty()) continue;
        if (row->fields.size() != kCorpusColumns.size())
            throw DataError("line " + std::to_string(row->line) + ": expected " +
                            std::to_string(kCorpusColumns.size()) + " fields, got " +
                            std::to_string(row->fields.size()));
        Paper p;
        p.paper_id = std::string(trim(row->fields[std::size_t(pos[0])]));
        p.journal_id = std::string(trim(row->fields[std::size_t(pos[1])]));
        bool known = true;
        p.doc_type = doc_type_from_label(trim(row->fields[std::size_t(pos[2])]), &known);
        if (!known) builder.count_unknown_doc_type();
        p.citations = parse_citations(row->fields[std::size_t(pos[3])], row->line);
        p.field_ids = parse_field_ids(row->fields[std::size_t(pos[4])]);
        builder.add(std::move(p), row->line);
    }
    return builder.take();
}

inline std::string require_json_string(const nlohmann::json& obj, const char* key,
                                       std::size_t line) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        throw DataError("line " + std::to_string(line) + ": missing or non-string \"" +
                        key + "\"");
    return it->get<std::string>();
}

inline std::uint64_t require_json_citations(const nlohmann::json& obj, std::size_t line) {
    const auto it = obj.find("citations");
    if (it != obj.end()) {
        if (it->is_number_unsigned()) return it->get<std::uint64_t>();
        if (it->is_number_integer()) {
            const auto v = it->get<std::int64_t>();
            if (v >= 0) return std::uint64_t(v);
        }
    }
    throw DataError("line " + std::to_string(line) +
                    ": citations must be a non-negative integer");
}

inline Corpus load_jsonl(std::istream& in, LoadReport* report, const JournalFieldMap* jf) {
    CorpusBuilder builder(report, jf);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && line.size() >= 3 && line[0] == '\xEF' && line[1] == '\xBB' &&
            line[2] == '\xBF')
            line.erase(0, 3);
        if (trim(line).empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(lineno) + ": invalid JSON (" +
                            std::string(e.what()) + ")");
        }
        if (!obj.is_object())
            throw DataError("line " + std::to_string(lineno) + ": expected a JSON object");
        Paper p;
        p.paper_id = require_json_string(obj, "paper_id", lineno);
        p.journal_id = require_json_string(obj, "journal_id", lineno);
        bool known = true;
        p.doc_type = doc_type_from_label(require_json_string(obj, "doc_type", lineno), &known);
        if (!known) builder.count_unknown_doc_type();
        p.citations = require_json_citations(obj, lineno);
        const auto ft = obj.find("field_ids");
        if (ft != obj.end()) {
            if (!ft->is_array())
                throw DataError("line " + std::to_string(lineno) +
                                ": field_ids must be an array of strings");
            for (const auto& f : *ft) {
                if (!f.is_string())
                    throw DataError("line " + std::to_string(lineno) +
                                    ": field_ids must be an array of strings");
                const auto id = std::string(trim(f.get<std::string>()));
                if (!id.empty()) p.field_ids.push_back(id);
            }
            std::sort(p.field_ids.begin(), p.field_ids.end());
            p.field_ids.erase(std::unique(p.field_ids.begin(), p.field_ids.end()),
                              p.field_ids.end());
        }
        builder.add(std::move(p), lineno);
    }
    return builder.take();
}

inline std::string join_field_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ';';
        out += id;
    }
    return out;
}

}  // namespace detail

inline Corpus load_corpus(std::istream& in, CorpusFormat format, LoadReport* report = nullptr,
                          const JournalFieldMap* journal_fields = nullptr) {
    return format == CorpusFormat::Csv ? detail::load_csv(in, report, journal_fields)
                                       : detail::load_jsonl(in, report, journal_fields);
}

// Sidecar format: CSV with header journal_id,field_id, one pair per row.
inline JournalFieldMap load_journal_fields(std::istream& in) {
    csv::Reader reader(in);
    const auto header = reader.next();
    if (!header || header->fields.size() != 2 ||
        detail::trim(header->fields[0]) != "journal_id" ||
        detail::trim(header->fields[1]) != "field_id")
        throw DataError("journal-field map must start with header journal_id,field_id");
    JournalFieldMap map;
    while (const auto row = reader.next()) {
        if (row->fields.size() == 1 && detail::trim(row->fields[0]).empty()) continue;
        if (row->fields.size() != 2)
            throw DataError("line " + std::to_string(row->line) +
                            ": expected 2 fields, got " + std::to_string(row->fields.size()));
        const auto journal = detail::trim(row->fields[0]);
        const auto field = detail::trim(row->fields[1]);
        if (journal.empty() || field.empty())
            throw DataError("line " + std::to_string(row->line) +
                            ": empty journal_id or field_id");
        map[std::string(journal)].emplace_back(field);
    }
    for (auto& [journal, fields] : map) {
        std::sort(fields.begin(), fields.end());
        fields.erase(std::unique(fields.begin(), fields.end()), fields.end());
    }
    return map;
}

inline void write_csv(const Corpus& corpus, std::ostream& out) {
    std::vector<std::string> row(detail::kCorpusColumns.begin(), detail::kCorpusColumns.end());
    csv::write_row(out, row);
    for (const auto& p : corpus.papers) {
        row[0] = p.paper_id;
        row[1] = p.journal_id;
        row[2] = std::string(to_string(p.doc_type));
        row[3] = std::to_string(p.citations);
        row[4] = detail::join_field_ids(p.field_ids);
        csv::write_row(out, row);
    }
}

inline void write_jsonl(const Corpus& corpus, std::ostream& out) {
    for (const auto& p : corpus.papers) {
        nlohmann::ordered_json obj;
        obj["paper_id"] = p.paper_id;
        obj["journal_id"] = p.journal_id;
        obj["doc_type"] = to_string(p.doc_type);
        obj["citations"] = p.citations;
        obj["field_ids"] = p.field_ids;
        out << obj.dump() << '\n';
    }
}

// Keeps only papers whose doc_type is in `allowed`. Field and journal
// registries carry over untouched, so journals emptied by the filter stay
// known (aggregation over them reports the emptiness explicitly).
inline Corpus filter_doc_types(const Corpus& corpus, const std::set<DocType>& allowed) {
    if (allowed.empty()) throw DataError("filter_doc_types: empty doc_type set");
    Corpus out;
    out.fields = corpus.fields;
    out.journals = corpus.journals;
    for (const auto& p : corpus.papers)
        if (allowed.count(p.doc_type)) out.papers.push_back(p);
    return out;
}

inline std::vector<const Paper*> papers_in_field(const Corpus& corpus, std::string_view field_id) {
    const bool all = field_id == kAllField;
    if (!all && !corpus.fields.count(std::string(field_id)))
        throw DataError("unknown field \"" + std::string(field_id) + "\"");
    std::vector<const Paper*> out;
    for (const auto& p : corpus.papers) {
        const bool hit = all || std::binary_search(p.field_ids.begin(), p.field_ids.end(),
                                                   field_id,
                                                   [](std::string_view a, std::string_view b) {
                                                       return a < b;
                                                   });
        if (hit) out.push_back(&p);
    }
    return out;
}

struct JournalAggregate {
    std::string journal_id;
    std::uint64_t n = 0;        // paper count under the doc-type filter
    double f = 0.0;             // citation average, citations / n
    std::uint64_t citations = 0;  // exact integer sum behind f; 0 if built by hand from (n, f)
};

inline JournalAggregate journal_aggregate(const Corpus& corpus, const std::string& journal_id,
                                          const std::set<DocType>& allowed) {
    if (allowed.empty()) throw DataError("journal_aggregate: empty doc_type filter");
    if (!corpus.journals.count(journal_id))
        throw DataError("unknown journal \"" + journal_id + "\"");
    JournalAggregate agg;
    agg.journal_id = journal_id;
    for (const auto& p : corpus.papers) {
        if (p.journal_id != journal_id || !allowed.count(p.doc_type)) continue;
        ++agg.n;
        agg.citations += p.citations;
    }
    if (agg.n == 0)
        throw DataError("journal \"" + journal_id +
                        "\" has no papers under the document-type filter");
    agg.f = double(agg.citations) / double(agg.n);
    return agg;
}

// One pass for every journal at once. Journals left empty by the filter are
// omitted; callers decide whether that is an error.
inline std::vector<JournalAggregate> all_journal_aggregates(const Corpus& corpus,
                                                            const std::set<DocType>& allowed) {
    if (allowed.empty()) throw DataError("all_journal_aggregates: empty doc_type filter");
    std::map<std::string_view, std::pair<std::uint64_t, std::uint64_t>> acc;  // n, citations
    for (const auto& p : corpus.papers) {
        if (!allowed.count(p.doc_type)) continue;
        auto& slot = acc[p.journal_id];
        ++slot.first;
        slot.second += p.citations;
    }
    std::vector<JournalAggregate> out;
    out.reserve(acc.size());
    for (const auto& [journal, slot] : acc) {
        JournalAggregate agg;
        agg.journal_id = std::string(journal);
        agg.n = slot.first;
        agg.citations = slot.second;
        agg.f = double(slot.second) / double(slot.first);
        out.push_back(std::move(agg));
    }
    return out;
}

}  // namespace phindex
