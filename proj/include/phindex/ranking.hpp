#pragma once

// Journal rankings and their comparison: deterministic ordering with a fixed
// tie-break, Kendall tau between two rankings over the same journals, top-k
// turnover, the inflection rank where scores turn negative, tier census, and
// a sigma-as-scaling-factor mode for within-field score lists.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"
#include "phi.hpp"
#include "stats.hpp"

namespace phindex {

struct ScoredJournal {
    std::string journal_id;
    double score = 0.0;
    std::uint64_t n = 0;
    double f = 0.0;
};

struct RankingEntry {
    std::uint32_t rank = 0;  // 1-based, consecutive
    std::string journal_id;
    double score = 0.0;
    std::uint64_t n = 0;
    double f = 0.0;
};

// Order: score descending, then n descending, then journal_id ascending.
// The full tie-break makes rankings reproducible across runs and platforms.
inline std::vector<RankingEntry> rank(std::vector<ScoredJournal> entries) {
    {
        std::set<std::string_view> ids;
        for (const auto& e : entries) {
            if (!std::isfinite(e.score))
                throw DataError("rank: non-finite score for journal \"" + e.journal_id + "\"");
            if (!ids.insert(e.journal_id).second)
                throw DataError("rank: duplicate journal \"" + e.journal_id + "\"");
        }
    }
    std::sort(entries.begin(), entries.end(), [](const ScoredJournal& a, const ScoredJournal& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.n != b.n) return a.n > b.n;
        return a.journal_id < b.journal_id;
    });
    std::vector<RankingEntry> out;
    out.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto& e = entries[i];
        out.push_back({std::uint32_t(i + 1), std::move(e.journal_id), e.score, e.n, e.f});
    }
    return out;
}

struct Transition {
    std::string journal_id;
    std::uint32_t rank_a = 0;
    std::uint32_t rank_b = 0;
};

struct RankingComparison {
    double tau = 0.0;                              // Kendall tau-b over the paired scores
    std::uint32_t top_k = 0;                       // effective k after clamping to size
    std::uint32_t new_entries_top_k = 0;           // journals in b's top k but not a's
    std::vector<Transition> transitions;           // rank changes, biggest improvement first
    std::optional<std::uint32_t> inflection_rank;  // see below; unset when no sign change
};

namespace detail {

inline void check_rank_order(const std::vector<RankingEntry>& r, const char* which) {
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i].rank != i + 1)
            throw DataError(std::string("compare: ") + which +
                            " ranking is not in rank order");
}

}  // namespace detail

// Compares two rankings of the same journal set. The inflection rank is the
// length of the prefix of a's order along which b's scores stay positive;
// it is unset when b is non-positive from the start or positive throughout.
inline RankingComparison compare(const std::vector<RankingEntry>& a,
                                 const std::vector<RankingEntry>& b, std::uint32_t top_k) {
    if (a.size() != b.size())
        throw DataError("compare: rankings cover different numbers of journals");
    if (a.size() < 2) throw DataError("compare: need at least 2 journals");
    detail::check_rank_order(a, "first");
    detail::check_rank_order(b, "second");

    std::map<std::string_view, const RankingEntry*> b_by_id;
    for (const auto& e : b)
        if (!b_by_id.emplace(e.journal_id, &e).second)
            throw DataError("compare: duplicate journal \"" + e.journal_id +
                            "\" in second ranking");

    RankingComparison cmp;
    std::vector<double> scores_a, scores_b;
    scores_a.reserve(a.size());
    scores_b.reserve(a.size());
    std::uint32_t positive_prefix = 0;
    bool prefix_alive = true;
    for (const auto& e : a) {
        const auto it = b_by_id.find(e.journal_id);
        if (it == b_by_id.end())
            throw DataError("compare: journal \"" + e.journal_id +
                            "\" missing from second ranking");
        scores_a.push_back(e.score);
        scores_b.push_back(it->second->score);
        if (prefix_alive) {
            if (it->second->score > 0)
                ++positive_prefix;
            else
                prefix_alive = false;
        }
        if (it->second->rank != e.rank)
            cmp.transitions.push_back({e.journal_id, e.rank, it->second->rank});
    }
    cmp.tau = kendall_tau(scores_a, scores_b);

    const auto k = std::min<std::uint32_t>(top_k, std::uint32_t(a.size()));
    cmp.top_k = k;
    std::set<std::string_view> top_a;
    for (std::uint32_t i = 0; i < k; ++i) top_a.insert(a[i].journal_id);
    for (std::uint32_t i = 0; i < k; ++i)
        if (!top_a.count(b[i].journal_id)) ++cmp.new_entries_top_k;

    if (positive_prefix > 0 && positive_prefix < a.size())
        cmp.inflection_rank = positive_prefix;

    std::sort(cmp.transitions.begin(), cmp.transitions.end(),
              [](const Transition& x, const Transition& y) {
                  const auto ix = std::int64_t(x.rank_a) - std::int64_t(x.rank_b);
                  const auto iy = std::int64_t(y.rank_a) - std::int64_t(y.rank_b);
                  if (ix != iy) return ix > iy;
                  return x.journal_id < y.journal_id;
              });
    return cmp;
}

// Longest prefix of the ranking whose journals have strictly positive phi.
// Unset when the prefix is empty or covers the whole ranking.
inline std::optional<std::uint32_t> inflection_point(
    const std::vector<RankingEntry>& ranking, const std::map<std::string, double>& phi_by_journal) {
    if (ranking.empty()) throw DataError("inflection_point: empty ranking");
    std::uint32_t prefix = 0;
    for (const auto& e : ranking) {
        const auto it = phi_by_journal.find(e.journal_id);
        if (it == phi_by_journal.end())
            throw DataError("inflection_point: no phi score for journal \"" + e.journal_id +
                            "\"");
        if (!(it->second > 0)) break;
        ++prefix;
    }
    if (prefix == 0 || prefix == ranking.size()) return std::nullopt;
    return prefix;
}

struct TierCensusRow {
    TierLabel label;
    std::uint64_t count = 0;
    double fraction = 0.0;
};

// All tiers of the scheme appear, in display order, zero counts included.
inline std::vector<TierCensusRow> tier_census(std::span<const double> phis, TierScheme scheme) {
    if (phis.empty()) throw DataError("tier_census: empty input");
    const auto order = tiers_of(scheme);
    std::map<Tier, std::uint64_t> counts;
    for (const Tier t : order) counts[t] = 0;
    for (const double phi : phis) ++counts[classify_tier(phi, scheme).tier];
    std::vector<TierCensusRow> rows;
    rows.reserve(order.size());
    for (const Tier t : order)
        rows.push_back({{scheme, t}, counts[t], double(counts[t]) / double(phis.size())});
    return rows;
}

// Within-field scoring from (n, f) aggregates alone. sigma_scale is a
// caller-chosen scaling factor: it divides every score uniformly, so the
// induced ranking does not depend on it. mu defaults to the pooled citation
// average of the listed entities (total citations over total papers);
// callers who know the field mean from a wider corpus than the listed rows
// can pass it explicitly.
inline std::vector<PhiScore> field_relative_phi(std::span<const JournalAggregate> aggregates,
                                                double sigma_scale,
                                                std::optional<double> mu_override = std::nullopt) {
    if (aggregates.empty()) throw DataError("field_relative_phi: empty aggregate list");
    if (!(sigma_scale > 0) || !std::isfinite(sigma_scale))
        throw DataError("field_relative_phi: sigma_scale must be positive");
    for (const auto& agg : aggregates)
        if (agg.n < 1)
            throw DataError("field_relative_phi: aggregate with n=0 for journal \"" +
                            agg.journal_id + "\"");
    double mu = 0.0;
    if (mu_override) {
        mu = *mu_override;
    } else {
        detail::CompensatedSum citations;
        std::uint64_t papers = 0;
        for (const auto& agg : aggregates) {
            citations.add(agg.f * double(agg.n));
            papers += agg.n;
        }
        mu = citations.value() / double(papers);
    }
    std::vector<PhiScore> out;
    out.reserve(aggregates.size());
    for (const auto& agg : aggregates) {
        PhiScore s;
        s.journal_id = agg.journal_id;
        s.n = agg.n;
        s.f = agg.f;
        s.mu = mu;
        s.sigma = sigma_scale;
        s.phi = phi_index(agg.f, agg.n, mu, sigma_scale);
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace phindex
