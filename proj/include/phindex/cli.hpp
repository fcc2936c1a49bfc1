#pragma once

// Command-line surface. Everything here is a thin, deterministic layer over
// the library: load a corpus, call the module functions, emit CSV. Output is
// assembled in memory and written only on success; file targets go through a
// temp file plus rename, so a failing run never leaves partial output.

#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "corpus.hpp"
#include "error.hpp"
#include "phi.hpp"
#include "ranking.hpp"
#include "sampling.hpp"
#include "stats.hpp"

namespace phindex::cli {

// Fixed-point rendering with the C locale's period, independent of the
// process locale. Negative zero prints without its sign.
inline std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    if (s[0] == '-' && s.find_first_not_of("0.", 1) == std::string::npos) s.erase(0, 1);
    return s;
}

inline std::set<DocType> parse_doc_filter(const std::string& code) {
    std::set<DocType> out;
    for (const char c : code) {
        switch (std::toupper((unsigned char)c)) {
            case 'A': out.insert(DocType::Article); break;
            case 'R': out.insert(DocType::Review); break;
            case 'O': out.insert(DocType::Other); break;
            default:
                throw CLI::ValidationError("--doc-filter",
                                           "use letters from A, R, O (e.g. AR)");
        }
    }
    if (out.empty()) throw CLI::ValidationError("--doc-filter", "must not be empty");
    return out;
}

inline std::string doc_filter_code(const std::set<DocType>& filter) {
    std::string s;
    if (filter.count(DocType::Article)) s += 'A';
    if (filter.count(DocType::Review)) s += 'R';
    if (filter.count(DocType::Other)) s += 'O';
    return s;
}

struct CorpusOptions {
    std::string path;
    std::string format = "auto";  // auto | csv | jsonl
    std::string journal_fields;   // optional sidecar path
};

inline CorpusFormat resolve_format(const std::string& format, const std::string& path) {
    if (format == "csv") return CorpusFormat::Csv;
    if (format == "jsonl") return CorpusFormat::Jsonl;
    auto ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    if (ext == ".jsonl" || ext == ".ndjson" || ext == ".json") return CorpusFormat::Jsonl;
    return CorpusFormat::Csv;
}

inline Corpus load_corpus_file(const CorpusOptions& opt, LoadReport* report = nullptr) {
    std::ifstream in(opt.path, std::ios::binary);
    if (!in) throw DataError("cannot open \"" + opt.path + "\"");
    std::optional<JournalFieldMap> sidecar;
    if (!opt.journal_fields.empty()) {
        std::ifstream side(opt.journal_fields, std::ios::binary);
        if (!side) throw DataError("cannot open \"" + opt.journal_fields + "\"");
        sidecar = load_journal_fields(side);
    }
    return load_corpus(in, resolve_format(opt.format, opt.path), report,
                       sidecar ? &*sidecar : nullptr);
}

// Buffers the whole document, then either streams it to the fallback stream
// (the usual stdout) or renames a temp file into place.
class OutputSink {
public:
    OutputSink(std::string path, std::ostream& fallback)
        : path_(std::move(path)), fallback_(fallback) {}

    std::ostream& stream() { return buffer_; }

    void commit() {
        if (path_.empty()) {
            fallback_ << buffer_.str();
            fallback_.flush();
            return;
        }
        namespace fs = std::filesystem;
        const fs::path target(path_);
        fs::path tmp = target;
        tmp += ".tmp." + std::to_string(::getpid());
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw DataError("cannot write \"" + tmp.string() + "\"");
            out << buffer_.str();
            out.flush();
            if (!out) throw DataError("failed while writing \"" + tmp.string() + "\"");
        }
        std::error_code ec;
        fs::rename(tmp, target, ec);
        if (ec) {
            fs::remove(tmp);
            throw DataError("cannot move output into place at \"" + path_ +
                            "\": " + ec.message());
        }
    }

private:
    std::string path_;
    std::ostream& fallback_;
    std::ostringstream buffer_;
};

namespace detail {

// Journals with at least one paper in the field under the filter, sorted.
inline std::vector<std::string> journals_in_field(const Corpus& corpus, const std::string& field,
                                                  const std::set<DocType>& allowed) {
    std::set<std::string> ids;
    for (const Paper* p : papers_in_field(corpus, field))
        if (allowed.count(p->doc_type)) ids.insert(p->journal_id);
    return {ids.begin(), ids.end()};
}

inline std::vector<PhiScore> field_phi_scores(const Corpus& corpus, const std::string& field,
                                              const std::set<DocType>& allowed) {
    const FieldStats fs = field_stats(corpus, field, allowed);
    std::vector<PhiScore> scores;
    for (const auto& id : journals_in_field(corpus, field, allowed))
        scores.push_back(phi_for_journal(corpus, id, fs, allowed));
    return scores;
}

inline std::vector<std::uint64_t> parse_size_grid(const std::string& spec) {
    std::vector<std::uint64_t> grid;
    if (spec.rfind("log:", 0) == 0) {
        unsigned long long lo = 0, hi = 0, count = 0;
        char extra = 0;
        if (std::sscanf(spec.c_str(), "log:%llu:%llu:%llu%c", &lo, &hi, &count, &extra) != 3 ||
            lo < 1 || hi < lo || count < 1)
            throw CLI::ValidationError("--sizes", "expected log:LO:HI:COUNT with LO <= HI");
        for (std::uint64_t i = 0; i < count; ++i) {
            const double t = count == 1 ? 0.0 : double(i) / double(count - 1);
            const double expo = std::log10(double(lo)) +
                               t * (std::log10(double(hi)) - std::log10(double(lo)));
            const auto n = std::uint64_t(std::llround(std::pow(10.0, expo)));
            if (grid.empty() || n > grid.back()) grid.push_back(n);
        }
        return grid;
    }
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            const auto n = std::stoull(part, &used);
            if (used != part.size() || n < 1) throw std::invalid_argument(part);
            grid.push_back(n);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--sizes", "expected a,b,c or log:LO:HI:COUNT");
        }
    }
    if (grid.empty()) throw CLI::ValidationError("--sizes", "empty size list");
    return grid;
}

inline std::vector<double> parse_k_list(const std::string& spec) {
    std::vector<double> ks;
    std::stringstream ss(spec);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            const double k = std::stod(part, &used);
            if (used != part.size() || !(k >= 0)) throw std::invalid_argument(part);
            ks.push_back(k);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--envelope-k", "expected a comma list like 3,2");
        }
    }
    if (ks.empty()) throw CLI::ValidationError("--envelope-k", "empty k list");
    return ks;
}

inline std::string k_suffix(double k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", k);
    return std::string("k") + buf;
}

// A population file is a single-column CSV with header "citations"; anything
// else is treated as a full corpus in the detected format.
inline std::vector<double> load_population(const CorpusOptions& opt, const std::string& field,
                                           const std::set<DocType>& allowed) {
    if (resolve_format(opt.format, opt.path) == CorpusFormat::Csv) {
        std::ifstream probe(opt.path, std::ios::binary);
        if (!probe) throw DataError("cannot open \"" + opt.path + "\"");
        csv::Reader reader(probe);
        const auto header = reader.next();
        if (header && header->fields.size() == 1 &&
            phindex::detail::trim(header->fields[0]) == "citations") {
            std::vector<double> values;
            while (const auto row = reader.next()) {
                if (row->fields.size() == 1 && phindex::detail::trim(row->fields[0]).empty())
                    continue;
                if (row->fields.size() != 1)
                    throw DataError("line " + std::to_string(row->line) +
                                    ": expected a single citations value");
                try {
                    std::size_t used = 0;
                    const auto raw = std::string(phindex::detail::trim(row->fields[0]));
                    const double v = std::stod(raw, &used);
                    if (used != raw.size() || !std::isfinite(v) || v < 0)
                        throw std::invalid_argument(raw);
                    values.push_back(v);
                } catch (const std::exception&) {
                    throw DataError("line " + std::to_string(row->line) +
                                    ": citations must be a non-negative number, got \"" +
                                    row->fields[0] + "\"");
                }
            }
            if (values.empty()) throw DataError("population file has no rows");
            return values;
        }
    }
    const Corpus corpus = load_corpus_file(opt);
    std::vector<double> values;
    for (const Paper* p : papers_in_field(corpus, field))
        if (allowed.count(p->doc_type)) values.push_back(double(p->citations));
    if (values.empty())
        throw DataError("no papers in field \"" + field +
                        "\" under the document-type filter");
    return values;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"phi index toolkit: standardized citation statistics for journals"};
    app.name("phindex");
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; command-line flags win");

    struct {
        CorpusOptions corpus;
        std::string output;
    } validate_args;
    auto* validate_cmd =
        app.add_subcommand("validate", "load a corpus, report row and registry counts");
    validate_cmd->add_option("input", validate_args.corpus.path, "corpus file")->required();
    validate_cmd->add_option("--format", validate_args.corpus.format, "csv, jsonl or auto")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    validate_cmd->add_option("--journal-fields", validate_args.corpus.journal_fields,
                             "journal_id,field_id sidecar CSV");
    validate_cmd->add_option("-o,--output", validate_args.output, "write CSV here instead of stdout");

    struct {
        CorpusOptions corpus;
        std::string output;
        std::string doc_filter = "AR";
        int decimals = 2;
    } stats_args;
    auto* stats_cmd =
        app.add_subcommand("field-stats", "per-field citation moments (ALL row first)");
    stats_cmd->add_option("input", stats_args.corpus.path, "corpus file")->required();
    stats_cmd->add_option("--format", stats_args.corpus.format, "csv, jsonl or auto")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    stats_cmd->add_option("--journal-fields", stats_args.corpus.journal_fields,
                          "journal_id,field_id sidecar CSV");
    stats_cmd->add_option("--doc-filter", stats_args.doc_filter,
                          "document types to keep (letters from A, R, O)");
    stats_cmd->add_option("--decimals", stats_args.decimals, "decimal places for mu, sigma, skewness")
        ->check(CLI::Range(0, 17));
    stats_cmd->add_option("-o,--output", stats_args.output, "write CSV here instead of stdout");

    struct {
        CorpusOptions corpus;
        std::string output;
        std::string doc_filter = "AR";
        std::string field = std::string(kAllField);
        bool composite = false;
        int decimals = 1;
    } phi_args;
    auto* phi_cmd = app.add_subcommand("phi", "phi scores for every journal in a field");
    phi_cmd->add_option("input", phi_args.corpus.path, "corpus file")->required();
    phi_cmd->add_option("--format", phi_args.corpus.format, "csv, jsonl or auto")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    phi_cmd->add_option("--journal-fields", phi_args.corpus.journal_fields,
                        "journal_id,field_id sidecar CSV");
    phi_cmd->add_option("--field", phi_args.field, "field id, or ALL for the whole corpus");
    phi_cmd->add_option("--doc-filter", phi_args.doc_filter,
                        "document types to keep (letters from A, R, O)");
    phi_cmd->add_flag("--composite", phi_args.composite,
                      "average each journal's per-field scores instead of scoring one field");
    phi_cmd->add_option("--decimals", phi_args.decimals, "decimal places for f and phi")
        ->check(CLI::Range(0, 17));
    phi_cmd->add_option("-o,--output", phi_args.output, "write CSV here instead of stdout");

    struct {
        CorpusOptions corpus;
        std::string output;
        std::string doc_filter = "AR";
        std::string field = std::string(kAllField);
        std::string by = "phi";
        double sigma_scale = 0.0;
        bool sigma_scale_set = false;
        double mu = 0.0;
        bool mu_set = false;
        int decimals = 1;
    } rank_args;
    auto* rank_cmd = app.add_subcommand("rank", "rank journals by phi or by raw citation average");
    rank_cmd->add_option("input", rank_args.corpus.path, "corpus file")->required();
    rank_cmd->add_option("--format", rank_args.corpus.format, "csv, jsonl or auto")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    rank_cmd->add_option("--journal-fields", rank_args.corpus.journal_fields,
                         "journal_id,field_id sidecar CSV");
    rank_cmd->add_option("--field", rank_args.field, "field id, or ALL");
    rank_cmd->add_option("--doc-filter", rank_args.doc_filter,
                         "document types to keep (letters from A, R, O)");
    rank_cmd->add_option("--by", rank_args.by, "ranking to list rows in: phi or f")
        ->check(CLI::IsMember({"phi", "f"}));
    auto* sigma_opt = rank_cmd->add_option("--sigma-scale", rank_args.sigma_scale,
                                           "field-relative mode: fixed scaling factor for sigma");
    auto* mu_opt = rank_cmd->add_option("--mu", rank_args.mu,
                                        "field-relative mode: reference mean (default: pooled)");
    mu_opt->needs(sigma_opt);
    rank_cmd->add_option("--decimals", rank_args.decimals, "decimal places for f and phi")
        ->check(CLI::Range(0, 17));
    rank_cmd->add_option("-o,--output", rank_args.output, "write CSV here instead of stdout");

    struct {
        CorpusOptions corpus;
        std::string output;
        std::string transitions;
        std::string doc_filter = "AR";
        std::string field = std::string(kAllField);
        std::string by = "f";
        std::string vs = "phi";
        std::uint32_t top_k = 10;
        double sigma_scale = 0.0;
        bool sigma_scale_set = false;
        double mu = 0.0;
        bool mu_set = false;
        int decimals = 4;
    } compare_args;
    auto* compare_cmd =
        app.add_subcommand("compare", "compare the f and phi rankings of one journal set");
    compare_cmd->add_option("input", compare_args.corpus.path, "corpus file")->required();
    compare_cmd->add_option("--format", compare_args.corpus.format, "csv, jsonl or auto")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    compare_cmd->add_option("--journal-fields", compare_args.corpus.journal_fields,
                            "journal_id,field_id sidecar CSV");
    compare_cmd->add_option("--field", compare_args.field, "field id, or ALL");
    compare_cmd->add_option("--doc-filter", compare_args.doc_filter,
                            "document types to keep (letters from A, R, O)");
    compare_cmd->add_option("--by", compare_args.by, "baseline ranking: f or phi")
        ->check(CLI::IsMember({"phi", "f"}));
    compare_cmd->add_option("--vs", compare_args.vs, "comparison ranking: f or phi")
        ->check(CLI::IsMember({"phi", "f"}));
    compare_cmd->add_option("--top-k", compare_args.top_k, "size of the turnover window");
    auto* cmp_sigma = compare_cmd->add_option("--sigma-scale", compare_args.sigma_scale,
                                              "field-relative mode: fixed scaling factor");
    compare_cmd->add_option("--mu", compare_args.mu, "field-relative mode: reference mean")
        ->needs(cmp_sigma);
    compare_cmd->add_option("--transitions", compare_args.transitions,
                            "also write per-journal rank changes to this CSV");
    compare_cmd->add_option("--decimals", compare_args.decimals, "decimal places for tau")
        ->check(CLI::Range(0, 17));
    compare_cmd->add_option("-o,--output", compare_args.output,
                            "write CSV here instead of stdout");

    struct {
        CorpusOptions corpus;
        std::string output;
        std::string envelope;
        std::string doc_filter = "AR";
        std::string field = std::string(kAllField);
        std::string sizes = "log:10:10000:20";
        std::string envelope_k = "3,2";
        std::string replacement = "without";
        std::uint64_t draws = kDefaultDrawsPerSize;
        std::uint64_t seed = 0;
        int decimals = 6;
    } sim_args;
    auto* sim_cmd = app.add_subcommand(
        "simulate", "draw random journals from a citation population, one point per draw");
    sim_cmd->add_option("input", sim_args.corpus.path,
                        "corpus file, or a single-column CSV with header citations")
        ->required();
    sim_cmd->add_option("--format", sim_args.corpus.format, "csv, jsonl or auto")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    sim_cmd->add_option("--journal-fields", sim_args.corpus.journal_fields,
                        "journal_id,field_id sidecar CSV");
    sim_cmd->add_option("--field", sim_args.field, "field id, or ALL");
    sim_cmd->add_option("--doc-filter", sim_args.doc_filter,
                        "document types to keep (letters from A, R, O)");
    sim_cmd->add_option("--sizes", sim_args.sizes, "a,b,c or log:LO:HI:COUNT");
    sim_cmd->add_option("--draws", sim_args.draws, "draws per sample size")
        ->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim_args.seed, "RNG seed; runs repeat bit for bit")
        ->required();
    sim_cmd->add_option("--replacement", sim_args.replacement, "with or without")
        ->check(CLI::IsMember({"with", "without"}));
    sim_cmd->add_option("--envelope", sim_args.envelope, "also write envelope curves to this CSV");
    sim_cmd->add_option("--envelope-k", sim_args.envelope_k, "k values for the envelope file");
    sim_cmd->add_option("--decimals", sim_args.decimals, "decimal places for f_n and phi")
        ->check(CLI::Range(0, 17));
    sim_cmd->add_option("-o,--output", sim_args.output, "write CSV here instead of stdout");

    struct {
        CorpusOptions corpus;
        std::string output;
        std::string doc_filter = "AR";
        std::string field = std::string(kAllField);
        std::string scheme = "3";
        int decimals = 4;
    } tiers_args;
    auto* tiers_cmd = app.add_subcommand("tiers", "tier census of a field's journals");
    tiers_cmd->add_option("input", tiers_args.corpus.path, "corpus file")->required();
    tiers_cmd->add_option("--format", tiers_args.corpus.format, "csv, jsonl or auto")
        ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
    tiers_cmd->add_option("--journal-fields", tiers_args.corpus.journal_fields,
                          "journal_id,field_id sidecar CSV");
    tiers_cmd->add_option("--field", tiers_args.field, "field id, or ALL");
    tiers_cmd->add_option("--doc-filter", tiers_args.doc_filter,
                          "document types to keep (letters from A, R, O)");
    tiers_cmd->add_option("--scheme", tiers_args.scheme, "3 or 6 tier scheme")
        ->check(CLI::IsMember({"3", "6"}));
    tiers_cmd->add_option("--decimals", tiers_args.decimals, "decimal places for fractions")
        ->check(CLI::Range(0, 17));
    tiers_cmd->add_option("-o,--output", tiers_args.output, "write CSV here instead of stdout");

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("phindex");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(int(argv.size()), argv.data());
        rank_args.sigma_scale_set = sigma_opt->count() > 0;
        rank_args.mu_set = mu_opt->count() > 0;
        compare_args.sigma_scale_set = cmp_sigma->count() > 0;
        compare_args.mu_set = compare_cmd->get_option("--mu")->count() > 0;
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (validate_cmd->parsed()) {
            LoadReport report;
            const Corpus corpus = load_corpus_file(validate_args.corpus, &report);
            OutputSink sink(validate_args.output, out);
            csv::write_row(sink.stream(), {"papers", "journals", "fields", "unknown_doc_type"});
            csv::write_row(sink.stream(),
                           {std::to_string(corpus.papers.size()),
                            std::to_string(corpus.journals.size()),
                            std::to_string(corpus.fields.size()),
                            std::to_string(report.unknown_doc_type)});
            sink.commit();
            return 0;
        }

        if (stats_cmd->parsed()) {
            const auto allowed = parse_doc_filter(stats_args.doc_filter);
            const Corpus corpus = load_corpus_file(stats_args.corpus);
            const int dec = stats_args.decimals;

            std::vector<std::string> field_ids{std::string(kAllField)};
            for (const auto& [id, name] : corpus.fields) field_ids.push_back(id);

            OutputSink sink(stats_args.output, out);
            csv::write_row(sink.stream(),
                           {"field_id", "mu", "sigma", "skewness", "n_papers", "n_journals"});
            for (const auto& id : field_ids) {
                bool any = false;
                for (const Paper* p : papers_in_field(corpus, id))
                    if (allowed.count(p->doc_type)) {
                        any = true;
                        break;
                    }
                if (!any) continue;
                const FieldStats fs = field_stats(corpus, id, allowed);
                csv::write_row(sink.stream(),
                               {fs.field_id, fixed(fs.moments.mean, dec),
                                fixed(fs.moments.stddev, dec),
                                fs.moments.skewness_defined ? fixed(fs.moments.skewness, dec)
                                                            : std::string("NA"),
                                std::to_string(fs.n_papers), std::to_string(fs.n_journals)});
            }
            sink.commit();
            return 0;
        }

        if (phi_cmd->parsed()) {
            const auto allowed = parse_doc_filter(phi_args.doc_filter);
            const Corpus corpus = load_corpus_file(phi_args.corpus);
            const int dec = phi_args.decimals;
            const int ref_dec = std::max(dec, 2);
            const std::string code = doc_filter_code(allowed);

            OutputSink sink(phi_args.output, out);
            csv::write_row(sink.stream(),
                           {"journal_id", "field_id", "doc_filter", "n", "f", "mu", "sigma",
                            "phi", "ci95_lo", "ci95_hi", "tier3", "tier6"});

            auto write_score_row = [&](const std::string& journal, const std::string& field,
                                       std::uint64_t n, double f, const std::string& mu,
                                       const std::string& sigma, double phi) {
                const auto ci = confidence_interval(phi, CiLevel::P95);
                csv::write_row(sink.stream(),
                               {journal, field, code, std::to_string(n), fixed(f, dec), mu,
                                sigma, fixed(phi, dec), fixed(ci.lower, ref_dec),
                                fixed(ci.upper, ref_dec),
                                std::string(to_string(classify_tier(phi, TierScheme::ThreeTier).tier)),
                                std::string(to_string(classify_tier(phi, TierScheme::SixTier).tier))});
            };

            if (!phi_args.composite) {
                const FieldStats fs = field_stats(corpus, phi_args.field, allowed);
                for (const auto& id : detail::journals_in_field(corpus, phi_args.field, allowed)) {
                    const PhiScore s = phi_for_journal(corpus, id, fs, allowed);
                    write_score_row(s.journal_id, s.field_id, s.n, s.f, fixed(s.mu, ref_dec),
                                    fixed(s.sigma, ref_dec), s.phi);
                }
            } else {
                std::map<std::string, std::set<std::string>> journal_fields;
                for (const auto& p : corpus.papers) {
                    if (!allowed.count(p.doc_type)) continue;
                    auto& fields = journal_fields[p.journal_id];
                    fields.insert(p.field_ids.begin(), p.field_ids.end());
                }
                std::map<std::string, FieldStats> stats_cache;
                for (const auto& [journal, fields] : journal_fields) {
                    if (fields.empty()) continue;  // no field allocation, no composite
                    std::vector<PhiScore> scores;
                    for (const auto& field : fields) {
                        auto it = stats_cache.find(field);
                        if (it == stats_cache.end())
                            it = stats_cache.emplace(field, field_stats(corpus, field, allowed))
                                     .first;
                        scores.push_back(phi_for_journal(corpus, journal, it->second, allowed));
                    }
                    const double comp = composite_phi(scores);
                    write_score_row(journal, "COMPOSITE", scores.front().n, scores.front().f,
                                    "NA", "NA", comp);
                }
            }
            sink.commit();
            return 0;
        }

        if (rank_cmd->parsed() || compare_cmd->parsed()) {
            const bool comparing = compare_cmd->parsed();
            const auto& common = comparing ? compare_args.corpus : rank_args.corpus;
            const auto doc_code = comparing ? compare_args.doc_filter : rank_args.doc_filter;
            const auto field = comparing ? compare_args.field : rank_args.field;
            const bool field_relative =
                comparing ? compare_args.sigma_scale_set : rank_args.sigma_scale_set;

            const auto allowed = parse_doc_filter(doc_code);
            const Corpus corpus = load_corpus_file(common);

            std::vector<PhiScore> scores;
            if (field_relative) {
                std::vector<JournalAggregate> aggs;
                for (const auto& id : detail::journals_in_field(corpus, field, allowed))
                    aggs.push_back(journal_aggregate(corpus, id, allowed));
                const double scale =
                    comparing ? compare_args.sigma_scale : rank_args.sigma_scale;
                std::optional<double> mu;
                if (comparing ? compare_args.mu_set : rank_args.mu_set)
                    mu = comparing ? compare_args.mu : rank_args.mu;
                scores = field_relative_phi(aggs, scale, mu);
            } else {
                scores = detail::field_phi_scores(corpus, field, allowed);
            }

            std::vector<ScoredJournal> by_phi, by_f;
            by_phi.reserve(scores.size());
            by_f.reserve(scores.size());
            for (const auto& s : scores) {
                by_phi.push_back({s.journal_id, s.phi, s.n, s.f});
                by_f.push_back({s.journal_id, s.f, s.n, s.f});
            }
            const auto phi_ranking = rank(std::move(by_phi));
            const auto f_ranking = rank(std::move(by_f));

            if (!comparing) {
                std::map<std::string_view, std::uint32_t> rank_f, rank_phi;
                for (const auto& e : f_ranking) rank_f[e.journal_id] = e.rank;
                for (const auto& e : phi_ranking) rank_phi[e.journal_id] = e.rank;
                const auto& order = rank_args.by == "f" ? f_ranking : phi_ranking;
                std::map<std::string_view, const PhiScore*> score_by_id;
                for (const auto& s : scores) score_by_id[s.journal_id] = &s;

                const int dec = rank_args.decimals;
                OutputSink sink(rank_args.output, out);
                csv::write_row(sink.stream(),
                               {"journal_id", "n", "f", "phi", "rank_f", "rank_phi"});
                for (const auto& e : order) {
                    const PhiScore* s = score_by_id.at(e.journal_id);
                    csv::write_row(sink.stream(),
                                   {s->journal_id, std::to_string(s->n), fixed(s->f, dec),
                                    fixed(s->phi, dec),
                                    std::to_string(rank_f.at(e.journal_id)),
                                    std::to_string(rank_phi.at(e.journal_id))});
                }
                sink.commit();
                return 0;
            }

            if (compare_args.by == compare_args.vs)
                throw CLI::ValidationError("--vs", "must differ from --by");
            const auto& a = compare_args.by == "f" ? f_ranking : phi_ranking;
            const auto& b = compare_args.vs == "f" ? f_ranking : phi_ranking;
            const RankingComparison cmp = compare(a, b, compare_args.top_k);

            OutputSink summary(compare_args.output, out);
            csv::write_row(summary.stream(),
                           {"tau", "top_k", "new_entries_top_k", "inflection_rank"});
            csv::write_row(summary.stream(),
                           {fixed(cmp.tau, compare_args.decimals), std::to_string(cmp.top_k),
                            std::to_string(cmp.new_entries_top_k),
                            cmp.inflection_rank ? std::to_string(*cmp.inflection_rank)
                                                : std::string()});
            if (!compare_args.transitions.empty()) {
                OutputSink side(compare_args.transitions, out);
                csv::write_row(side.stream(),
                               {"journal_id", "rank_" + compare_args.by,
                                "rank_" + compare_args.vs, "delta"});
                for (const auto& t : cmp.transitions)
                    csv::write_row(side.stream(),
                                   {t.journal_id, std::to_string(t.rank_a),
                                    std::to_string(t.rank_b),
                                    std::to_string(std::int64_t(t.rank_a) -
                                                   std::int64_t(t.rank_b))});
                side.commit();
            }
            summary.commit();
            return 0;
        }

        if (sim_cmd->parsed()) {
            const auto allowed = parse_doc_filter(sim_args.doc_filter);
            err << "seed=" << sim_args.seed << '\n';
            const auto population =
                detail::load_population(sim_args.corpus, sim_args.field, allowed);

            SimulationConfig config;
            config.size_grid = detail::parse_size_grid(sim_args.sizes);
            config.draws_per_size = sim_args.draws;
            config.seed = sim_args.seed;
            config.replacement = sim_args.replacement == "with"
                                     ? Replacement::WithReplacement
                                     : Replacement::WithoutReplacement;
            const SimulationResult result = run_simulation(population, config);

            const int dec = sim_args.decimals;
            OutputSink sink(sim_args.output, out);
            csv::write_row(sink.stream(), {"n", "f_n", "phi"});
            for (const auto& p : result.points)
                csv::write_row(sink.stream(), {std::to_string(p.n), fixed(p.f_n, dec),
                                               fixed(p.phi, dec)});
            if (!sim_args.envelope.empty()) {
                const auto ks = detail::parse_k_list(sim_args.envelope_k);
                std::vector<Envelope> envelopes;
                for (const double k : ks)
                    envelopes.push_back(clt_envelope(result.population_mu,
                                                     result.population_sigma, k,
                                                     config.size_grid));
                OutputSink side(sim_args.envelope, out);
                std::vector<std::string> header{"n"};
                for (const double k : ks) {
                    header.push_back("lower_" + detail::k_suffix(k));
                    header.push_back("upper_" + detail::k_suffix(k));
                }
                csv::write_row(side.stream(), header);
                for (std::size_t i = 0; i < config.size_grid.size(); ++i) {
                    std::vector<std::string> row{std::to_string(config.size_grid[i])};
                    for (const auto& env : envelopes) {
                        row.push_back(fixed(env.curve[i].lower, dec));
                        row.push_back(fixed(env.curve[i].upper, dec));
                    }
                    csv::write_row(side.stream(), row);
                }
                side.commit();
            }
            sink.commit();
            return 0;
        }

        if (tiers_cmd->parsed()) {
            const auto allowed = parse_doc_filter(tiers_args.doc_filter);
            const Corpus corpus = load_corpus_file(tiers_args.corpus);
            const auto scores = detail::field_phi_scores(corpus, tiers_args.field, allowed);
            std::vector<double> phis;
            phis.reserve(scores.size());
            for (const auto& s : scores) phis.push_back(s.phi);
            const auto scheme =
                tiers_args.scheme == "3" ? TierScheme::ThreeTier : TierScheme::SixTier;
            const auto census = tier_census(phis, scheme);

            OutputSink sink(tiers_args.output, out);
            csv::write_row(sink.stream(), {"tier", "count", "fraction"});
            for (const auto& row : census)
                csv::write_row(sink.stream(),
                               {std::string(to_string(row.label.tier)),
                                std::to_string(row.count),
                                fixed(row.fraction, tiers_args.decimals)});
            sink.commit();
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace phindex::cli
