// Acceptance gate: one line per criterion, PASS or FAIL, with the tolerance
// each check runs under pinned right here in the code. Exits nonzero when
// any criterion fails. Informational context goes to "note:" lines.

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <phindex/cli.hpp>
#include <phindex/phindex.hpp>

#include "golden.hpp"
#include "synthetic.hpp"

using namespace phindex;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    if (!pass) ++failures;
}

void note(int id, const std::string& text) {
    std::printf("note: criterion %d: %s\n", id, text.c_str());
}

std::string num(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// quadratic-time pair census; shares only the final arithmetic expression
// with the production routine so agreement there is meaningful
double brute_tau(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::uint64_t concordant = 0, discordant = 0, tied_x = 0, tied_y = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool ex = x[i] == x[j];
            const bool ey = y[i] == y[j];
            if (ex) ++tied_x;
            if (ey) ++tied_y;
            if (ex || ey) continue;
            if ((x[i] < x[j]) == (y[i] < y[j]))
                ++concordant;
            else
                ++discordant;
        }
    const std::uint64_t n0 = std::uint64_t(n) * (n - 1) / 2;
    const std::int64_t diff = std::int64_t(concordant) - std::int64_t(discordant);
    return double(diff) / std::sqrt(double(n0 - tied_x) * double(n0 - tied_y));
}

void criterion_1_global_reference() {
    double worst = 0.0;
    const char* worst_id = "";
    for (const auto& row : golden::kGlobalTop50) {
        const double phi =
            phi_index(row.f, row.n, golden::kGlobalMu, golden::kGlobalSigma);
        const double delta = std::abs(phi - row.phi);
        if (delta > worst) {
            worst = delta;
            worst_id = row.id;
        }
    }
    report(1, worst <= 0.5,
           "all 50 reference journals within +-0.5 of the printed score (max |delta| " +
               num(worst) + " at " + worst_id + ")");
}

void criterion_2_composite() {
    PhiScore a, b;
    a.journal_id = b.journal_id = "J";
    a.field_id = "F1";
    b.field_id = "F2";
    a.doc_filter = b.doc_filter = {DocType::Article, DocType::Review};
    a.phi = 68.3;
    b.phi = 42.5;
    const std::vector<PhiScore> parts = {a, b};
    const std::string printed = cli::fixed(composite_phi(parts), 1);
    report(2, printed == "55.4",
           "composite of (68.3, 42.5) prints as " + printed + " (expected 55.4)");
}

void criterion_3_publisher_reference() {
    std::vector<JournalAggregate> aggs;
    for (const auto& p : golden::kPublishers) aggs.push_back({p.id, p.n, p.f, 0});
    const auto scores =
        field_relative_phi(aggs, golden::kPublisherSigmaScale, golden::kPublisherMu);

    bool spots_ok = true;
    std::string spot_detail;
    for (std::size_t i = 0; i < 3; ++i) {  // AAAS, Springer Nature, APS
        const double delta = std::abs(scores[i].phi - golden::kPublishers[i].phi);
        if (delta > 0.5) spots_ok = false;
        if (!spot_detail.empty()) spot_detail += ", ";
        spot_detail += std::string(golden::kPublishers[i].id) + " " + num(scores[i].phi) +
                       " vs " + num(golden::kPublishers[i].phi, 1);
    }

    std::vector<ScoredJournal> entries;
    for (const auto& s : scores) entries.push_back({s.journal_id, s.phi, s.n, s.f});
    const auto r = rank(entries);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i].journal_id != golden::kPublishers[i].id) ++mismatches;

    report(3, spots_ok && mismatches == 0,
           "publisher scores from mu=13.3, scale=10 within +-0.5 and printed order exact "
           "(" +
               spot_detail + "; " + std::to_string(mismatches) + "/20 positions differ)");

    if (!spots_ok || mismatches != 0) {
        note(3,
             "the printed inputs are mutually inconsistent at one decimal: no mean in "
             "[13.25, 13.35) reproduces every printed score to +-0.5 together with the "
             "printed order");
        const double mu_exact = 40.0 / 3.0;
        const auto rescored = field_relative_phi(aggs, golden::kPublisherSigmaScale, mu_exact);
        double worst = 0.0;
        for (std::size_t i = 0; i < rescored.size(); ++i)
            worst = std::max(worst, std::abs(rescored[i].phi - golden::kPublishers[i].phi));
        std::vector<ScoredJournal> re_entries;
        for (const auto& s : rescored)
            re_entries.push_back({s.journal_id, s.phi, s.n, s.f});
        const auto rr = rank(re_entries);
        std::size_t re_mismatch = 0;
        for (std::size_t i = 0; i < rr.size(); ++i)
            if (rr[i].journal_id != golden::kPublishers[i].id) ++re_mismatch;
        note(3, "rescoring with mu=40/3 (the likely unrounded mean behind \"13.3\") gives "
                "max |delta| " +
                    num(worst) + " and " + std::to_string(re_mismatch) +
                    "/20 order mismatches; the published scores were evidently computed "
                    "from unrounded inputs and printed after rounding");
    }
}

void criterion_4_intervals_bit_exact() {
    bool ok = true;
    for (int i = -500; i <= 500; ++i) {
        const double phi = double(i) * 0.617 + 0.0137;
        const auto c95 = confidence_interval(phi, CiLevel::P95);
        const auto c99 = confidence_interval(phi, CiLevel::P99);
        const auto c997 = confidence_interval(phi, CiLevel::P997);
        ok = ok && c95.lower == phi - 1.96 && c95.upper == phi + 1.96;
        ok = ok && c99.lower == phi - 2.576 && c99.upper == phi + 2.576;
        ok = ok && c997.lower == phi - 3.0 && c997.upper == phi + 3.0;
    }
    ok = ok && ci_z(CiLevel::P95) == 1.96 && ci_z(CiLevel::P99) == 2.576 &&
         ci_z(CiLevel::P997) == 3.0;
    report(4, ok,
           "interval bounds are bit-exactly phi+-1.96, phi+-2.576, phi+-3 over 1001 "
           "probe values");
}

void criterion_5_scale_independence() {
    const auto population = synth::lognormal_population(100000, 1.0, 1.0, 20260819);
    const Moments pm = describe(population);
    const bool skew_ok =
        pm.skewness_defined && pm.skewness > 5.0 && pm.skewness < 15.0;

    SimulationConfig config;
    config.size_grid = {100, 400, 1600, 6400};
    config.draws_per_size = 10000;
    config.seed = 424243;
    config.replacement = Replacement::WithReplacement;
    const SimulationResult result = run_simulation(population, config);

    bool se_ok = true;
    std::string se_detail;
    std::vector<double> log_n, log_sd;
    for (const auto n : config.size_grid) {
        const double se = empirical_se(result, n);
        se_ok = se_ok && se >= 0.95 && se <= 1.05;
        if (!se_detail.empty()) se_detail += " ";
        se_detail += num(se);
        std::vector<double> fs;
        for (const auto& p : result.points)
            if (p.n == n) fs.push_back(p.f_n);
        log_n.push_back(std::log(double(n)));
        log_sd.push_back(std::log(describe(fs).stddev));
    }

    // least-squares slope of log sd(f_n) against log n
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        mx += log_n[i];
        my += log_sd[i];
    }
    mx /= double(log_n.size());
    my /= double(log_n.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        sxy += (log_n[i] - mx) * (log_sd[i] - my);
        sxx += (log_n[i] - mx) * (log_n[i] - mx);
    }
    const double slope = sxy / sxx;
    const bool slope_ok = slope >= -0.55 && slope <= -0.45;

    const double c3 = coverage(result.points, result.population_mu,
                               result.population_sigma, 3.0);
    const double c2 = coverage(result.points, result.population_mu,
                               result.population_sigma, 2.0);
    const bool c3_ok = c3 >= 0.99;
    const bool c2_ok = c2 >= 0.93 && c2 <= 0.97;

    report(5, skew_ok && se_ok && slope_ok && c3_ok && c2_ok,
           "lognormal population (skewness " + num(pm.skewness, 2) +
               ", target 5..15), per-bin SE {" + se_detail +
               "} within 1+-0.05, spread slope " + num(slope) +
               " within -0.5+-0.05, k=3 coverage " + num(c3) + " >= 0.99, k=2 coverage " +
               num(c2) + " in [0.93, 0.97]");
    note(5,
         "draws use replacement so the unit standard error is exact at every size; "
         "without replacement the 6400-sample bin's true value is the finite-population "
         "corrected 0.968, brushing the band's lower edge");
}

void criterion_6_kendall_oracle() {
    SampleRng rng(8675309);
    std::size_t checked = 0;
    bool ok = true;
    for (int round = 0; round < 100 && ok; ++round) {
        const std::size_t n = 2 + rng.next_below(199);  // lengths 2..200
        const bool coarse = round % 2 == 0;             // every other round is tie-heavy
        std::vector<double> x(n), y(n);
        bool x_tied = true, y_tied = true;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = coarse ? double(rng.next_below(8)) : rng.next_unit();
            y[i] = coarse ? double(rng.next_below(8)) : rng.next_unit();
            if (i && x[i] != x[0]) x_tied = false;
            if (i && y[i] != y[0]) y_tied = false;
        }
        if (x_tied || y_tied) continue;  // undefined by construction, skip
        ok = kendall_tau(x, y) == brute_tau(x, y);
        ++checked;
    }
    report(6, ok,
           "fast tie-corrected tau equals the quadratic pair census bitwise on " +
               std::to_string(checked) + " random vector pairs of length <= 200");
}

void criterion_7_moments_oracle() {
    const auto values = synth::lognormal_population(10000, 0.0, 1.5, 99);

    // plain long-double two-pass reference
    long double sum = 0.0L;
    for (const double v : values) sum += v;
    const long double mean = sum / (long double)(values.size());
    long double m2 = 0.0L, m3 = 0.0L;
    for (const double v : values) {
        const long double d = (long double)(v)-mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= (long double)(values.size());
    m3 /= (long double)(values.size());
    const double ref_mean = double(mean);
    const double ref_sd = double(std::sqrt(m2));
    const double ref_skew = double(m3 / (m2 * std::sqrt(m2)));

    const Moments m = describe(values);
    const double rel_mean = std::abs(m.mean - ref_mean) / std::abs(ref_mean);
    const double rel_sd = std::abs(m.stddev - ref_sd) / ref_sd;
    const double rel_skew = std::abs(m.skewness - ref_skew) / std::abs(ref_skew);
    const bool oracle_ok = rel_mean <= 1e-12 && rel_sd <= 1e-12 && rel_skew <= 1e-12;

    // affine map y = a + b x with negative b flips the skew sign
    const double a = 7.25, b = -3.0;
    std::vector<double> mapped;
    mapped.reserve(values.size());
    for (const double v : values) mapped.push_back(a + b * v);
    const Moments t = describe(mapped);
    const bool affine_ok =
        std::abs(t.mean - (a + b * m.mean)) <= 1e-12 * std::abs(t.mean) &&
        std::abs(t.stddev - 3.0 * m.stddev) <= 1e-12 * t.stddev &&
        std::abs(t.skewness + m.skewness) <= 1e-12 * std::abs(t.skewness);

    report(7, oracle_ok && affine_ok,
           "moments match a long-double two-pass reference to 1e-12 relative on 10^4 "
           "heavy-tailed values (mean " +
               num(rel_mean * 1e15, 1) + "e-15, sd " + num(rel_sd * 1e15, 1) +
               "e-15, skew " + num(rel_skew * 1e15, 1) +
               "e-15) and affine transforms map them as stated");
}

void criterion_8_equivalence_pairs() {
    SampleRng rng(5150);
    const double mu = 4.11, sigma = 12.5, k = 2.0;
    double worst_phi = 0.0, worst_ratio = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t n1 = 1 + rng.next_below(10000);
        const std::uint64_t n2 = 1 + rng.next_below(10000);
        // keep the score bounded away from zero so relative error is meaningful
        const double f1 = mu + (0.5 + rng.next_unit()) * 40.0;
        const double phi1 = phi_index(f1, n1, mu, sigma);
        // second journal built to share the score, hence the ratio
        const double f2 = mu + phi1 * sigma / std::sqrt(double(n2));
        const double phi2 = phi_index(f2, n2, mu, sigma);
        worst_phi = std::max(worst_phi, std::abs(phi2 - phi1) / std::abs(phi1));
        const double r1 = equivalence_ratio(f1, n1, mu, sigma, k);
        const double r2 = equivalence_ratio(f2, n2, mu, sigma, k);
        worst_ratio = std::max(worst_ratio, std::abs(r2 - r1) / std::abs(r1));
    }
    report(8, worst_phi <= 1e-9 && worst_ratio <= 1e-9,
           "1000 journal pairs built to share the k=2 equivalence ratio agree in phi to "
           "1e-9 relative (worst " +
               num(worst_phi * 1e12, 2) + "e-12) and in ratio (worst " +
               num(worst_ratio * 1e12, 2) + "e-12)");
}

void criterion_9_inflection_and_tiers() {
    SampleRng rng(314159);
    bool inflection_ok = true, census_ok = true;
    int corpora = 0, with_cut = 0;
    for (int round = 0; round < 20; ++round) {
        Corpus corpus;
        const int journals = 5 + int(rng.next_below(36));
        for (int j = 0; j < journals; ++j) {
            const std::size_t papers = 1 + rng.next_below(30);
            std::vector<std::uint64_t> citations;
            for (std::size_t p = 0; p < papers; ++p) {
                const double u = rng.next_unit();
                citations.push_back(std::uint64_t(u * u * 60.0));
            }
            synth::add_journal(corpus, "J" + std::to_string(j), citations);
        }
        const std::set<DocType> allowed = {DocType::Article};
        const FieldStats fs = field_stats(corpus, kAllField, allowed);

        std::vector<ScoredJournal> entries;
        std::map<std::string, double> phi_by_journal;
        std::size_t above_mean = 0;
        for (const auto& agg : all_journal_aggregates(corpus, allowed)) {
            const PhiScore s = phi_for_journal(corpus, agg.journal_id, fs, allowed);
            entries.push_back({s.journal_id, s.phi, s.n, s.f});
            phi_by_journal[s.journal_id] = s.phi;
            if (agg.f > fs.moments.mean) ++above_mean;
        }
        const auto ranking = rank(entries);
        const auto cut = inflection_point(ranking, phi_by_journal);
        if (above_mean == 0 || above_mean == ranking.size()) {
            inflection_ok = inflection_ok && !cut.has_value();
        } else {
            inflection_ok = inflection_ok && cut.has_value() && *cut == above_mean;
            ++with_cut;
        }

        std::vector<double> phis;
        for (const auto& [id, phi] : phi_by_journal) phis.push_back(phi);
        for (const auto scheme : {TierScheme::ThreeTier, TierScheme::SixTier}) {
            double total = 0.0;
            std::uint64_t count = 0;
            for (const auto& row : tier_census(phis, scheme)) {
                total += row.fraction;
                count += row.count;
            }
            census_ok = census_ok && std::abs(total - 1.0) <= 1e-12 &&
                        count == phis.size();
        }
        ++corpora;
    }

    const double half_width = confidence_interval(0.0, CiLevel::P95).upper;
    const bool boundary_ok =
        half_width == 1.96 &&
        classify_tier(half_width, TierScheme::ThreeTier).tier == Tier::AverageImpact &&
        classify_tier(std::nextafter(half_width, 2.0), TierScheme::ThreeTier).tier ==
            Tier::HighImpact &&
        classify_tier(-half_width, TierScheme::ThreeTier).tier == Tier::AverageImpact &&
        classify_tier(std::nextafter(-half_width, -2.0), TierScheme::ThreeTier).tier ==
            Tier::LowImpact;

    report(9, inflection_ok && census_ok && boundary_ok,
           "on " + std::to_string(corpora) +
               " randomized corpora the sign-change rank equals the count of journals "
               "above the field mean (" +
               std::to_string(with_cut) +
               " had a cut), tier fractions sum to 1 within 1e-12, and the three-tier "
               "boundary is bit-identical to the 95% half-width");
}

void criterion_10_determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "phindex_acceptance";
    fs::create_directories(dir);
    const fs::path pop_path = dir / "population.csv";
    {
        std::ofstream pop(pop_path, std::ios::binary);
        pop << "citations\n";
        for (int i = 0; i < 200; ++i) pop << (i * 7) % 113 << "\n";
    }

    const std::vector<std::string> args = {"simulate", pop_path.string(), "--sizes",
                                           "10,50",    "--draws",         "200",
                                           "--seed",   "777"};
    std::ostringstream out1, err1, out2, err2;
    const int code1 = cli::run(args, out1, err1);
    const int code2 = cli::run(args, out2, err2);
    const bool sim_ok = code1 == 0 && code2 == 0 && out1.str() == out2.str() &&
                        !out1.str().empty();

    // tie-break stability: equal scores fall back to n, then to the id
    std::vector<ScoredJournal> entries;
    SampleRng rng(1612);
    for (int i = 0; i < 200; ++i)
        entries.push_back({"J" + std::to_string(i), double(rng.next_below(12)),
                           1 + rng.next_below(5), 0.0});
    const auto baseline = rank(entries);
    bool rank_ok = true;
    for (int round = 0; round < 5; ++round) {
        std::mt19937_64 shuffler(round);
        std::shuffle(entries.begin(), entries.end(), shuffler);
        const auto again = rank(entries);
        for (std::size_t i = 0; i < baseline.size(); ++i)
            rank_ok = rank_ok && again[i].journal_id == baseline[i].journal_id &&
                      again[i].rank == baseline[i].rank;
    }

    std::error_code ec;
    fs::remove_all(dir, ec);

    report(10, sim_ok && rank_ok,
           "seeded simulation output is byte-identical across runs and the tie-broken "
           "ranking is invariant under 5 input shuffles of 200 tie-heavy journals");
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();

    criterion_1_global_reference();
    criterion_2_composite();
    criterion_3_publisher_reference();
    criterion_4_intervals_bit_exact();
    criterion_5_scale_independence();
    criterion_6_kendall_oracle();
    criterion_7_moments_oracle();
    criterion_8_equivalence_pairs();
    criterion_9_inflection_and_tiers();
    criterion_10_determinism();

    const auto elapsed = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    std::printf("%d/10 criteria green, elapsed %.1fs\n", 10 - failures, elapsed);
    return failures == 0 ? 0 : 1;
}
