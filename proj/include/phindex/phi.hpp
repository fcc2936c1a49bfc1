#pragma once

// The phi index: a z-score for journal citation averages,
//   phi = (f - mu) * sqrt(n) / sigma
// where f is the journal's citation average over n papers and mu, sigma are
// the per-paper citation mean and standard deviation of the reference set.
// Under this standardization SE(phi) = 1 exactly, which is what makes the
// fixed-width confidence intervals and tier boundaries below work.

#include <cmath>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "corpus.hpp"
#include "error.hpp"
#include "stats.hpp"

namespace phindex {

inline double phi_index(double f, std::uint64_t n, double mu, double sigma) {
    if (n < 1) throw DataError("phi_index: n must be at least 1");
    if (!std::isfinite(f) || !std::isfinite(mu) || !std::isfinite(sigma))
        throw DataError("phi_index: non-finite input");
    if (!(sigma > 0)) throw DataError("phi_index: sigma must be positive");
    return (f - mu) * std::sqrt(double(n)) / sigma;
}

struct PhiScore {
    std::string journal_id;
    std::string field_id;  // a concrete field or kAllField; empty in field-relative mode
    std::set<DocType> doc_filter;
    std::uint64_t n = 0;
    double f = 0.0;
    double mu = 0.0;
    double sigma = 1.0;
    double phi = 0.0;
};

// Scores one journal against the given field statistics. The journal's n and
// f always cover its full output under the filter, whatever field the
// reference stats came from; fields select which journals are compared, not
// which of a journal's papers count.
inline PhiScore phi_for_journal(const Corpus& corpus, const std::string& journal_id,
                                const FieldStats& stats, const std::set<DocType>& allowed) {
    if (stats.doc_filter != allowed)
        throw DataError("phi_for_journal: document-type filter differs from the one the "
                        "field stats were computed under");
    const JournalAggregate agg = journal_aggregate(corpus, journal_id, allowed);
    PhiScore s;
    s.journal_id = journal_id;
    s.field_id = stats.field_id;
    s.doc_filter = allowed;
    s.n = agg.n;
    s.f = agg.f;
    s.mu = stats.moments.mean;
    s.sigma = stats.moments.stddev;
    s.phi = phi_index(s.f, s.n, s.mu, s.sigma);
    return s;
}

// Unweighted mean of one journal's per-field scores.
inline double composite_phi(std::span<const PhiScore> per_field) {
    if (per_field.empty()) throw DataError("composite_phi: empty score list");
    const auto& first = per_field.front();
    double sum = 0.0;
    for (const auto& s : per_field) {
        if (s.journal_id != first.journal_id)
            throw DataError("composite_phi: scores mix journals \"" + first.journal_id +
                            "\" and \"" + s.journal_id + "\"");
        if (s.doc_filter != first.doc_filter)
            throw DataError("composite_phi: scores mix document-type filters");
        sum += s.phi;
    }
    return sum / double(per_field.size());
}

enum class CiLevel { P95, P99, P997 };

inline double ci_z(CiLevel level) {
    switch (level) {
        case CiLevel::P95: return 1.96;
        case CiLevel::P99: return 2.576;
        default: return 3.0;
    }
}

struct ConfidenceInterval {
    CiLevel level = CiLevel::P95;
    double lower = 0.0;
    double upper = 0.0;
};

// SE(phi) is exactly 1, so the interval is phi -+ z with no estimation step.
inline ConfidenceInterval confidence_interval(double phi, CiLevel level) {
    if (!std::isfinite(phi)) throw DataError("confidence_interval: non-finite phi");
    const double z = ci_z(level);
    return {level, phi - z, phi + z};
}

enum class TierScheme { ThreeTier, SixTier };

enum class Tier {
    // three-tier scheme
    HighImpact,
    AverageImpact,
    LowImpact,
    // six-tier scheme
    Significant,
    Strong,
    HighAverage,
    LowAverage,
    Weak,
    Marginal,
};

struct TierLabel {
    TierScheme scheme = TierScheme::ThreeTier;
    Tier tier = Tier::AverageImpact;
    bool operator==(const TierLabel&) const = default;
};

inline std::string_view to_string(Tier t) {
    switch (t) {
        case Tier::HighImpact: return "high";
        case Tier::AverageImpact: return "average";
        case Tier::LowImpact: return "low";
        case Tier::Significant: return "significant";
        case Tier::Strong: return "strong";
        case Tier::HighAverage: return "high_average";
        case Tier::LowAverage: return "low_average";
        case Tier::Weak: return "weak";
        default: return "marginal";
    }
}

// Tiers of a scheme in display order, best first.
inline std::span<const Tier> tiers_of(TierScheme scheme) {
    static constexpr Tier three[] = {Tier::HighImpact, Tier::AverageImpact, Tier::LowImpact};
    static constexpr Tier six[] = {Tier::Significant, Tier::Strong, Tier::HighAverage,
                                   Tier::LowAverage,  Tier::Weak,   Tier::Marginal};
    return scheme == TierScheme::ThreeTier ? std::span<const Tier>(three)
                                           : std::span<const Tier>(six);
}

// Three-tier edges reuse the 95% z value; six-tier intervals are half-open
// with each boundary belonging to the lower tier, so 0 itself counts as low
// average. Comparisons are against the stored double constants, no epsilon.
inline TierLabel classify_tier(double phi, TierScheme scheme) {
    if (!std::isfinite(phi)) throw DataError("classify_tier: non-finite phi");
    if (phi == 0.0) phi = 0.0;  // fold -0 into 0
    if (scheme == TierScheme::ThreeTier) {
        if (phi > 1.96) return {scheme, Tier::HighImpact};
        if (phi < -1.96) return {scheme, Tier::LowImpact};
        return {scheme, Tier::AverageImpact};
    }
    if (phi > 3.0) return {scheme, Tier::Significant};
    if (phi > 2.0) return {scheme, Tier::Strong};
    if (phi > 0.0) return {scheme, Tier::HighAverage};
    if (phi > -2.0) return {scheme, Tier::LowAverage};
    if (phi > -3.0) return {scheme, Tier::Weak};
    return {scheme, Tier::Marginal};
}

// How far along the k-sigma envelope a journal sits: phi / k. Value 1 means
// exactly on the upper envelope, -1 on the lower.
inline double equivalence_ratio(double f, std::uint64_t n, double mu, double sigma, double k) {
    if (!(k > 0) || !std::isfinite(k)) throw DataError("equivalence_ratio: k must be positive");
    return phi_index(f, n, mu, sigma) / k;
}

}  // namespace phindex
