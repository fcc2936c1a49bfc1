#pragma once

// Descriptive statistics: two-pass central moments with compensated
// summation (population convention, divisor N) and tie-corrected Kendall
// rank correlation (tau-b) with an O(n log n) inversion count.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "corpus.hpp"
#include "error.hpp"

namespace phindex {

namespace detail {

// Neumaier variant of Kahan summation; keeps heavy-tailed sums near one ulp
// regardless of input order.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace detail

struct Moments {
    std::uint64_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;    // population convention, divisor N
    double skewness = 0.0;  // meaningful only when skewness_defined
    bool skewness_defined = false;
};

inline Moments describe(std::span<const double> values) {
    if (values.empty()) throw DataError("describe: empty input");
    detail::CompensatedSum sum;
    for (double x : values) {
        if (!std::isfinite(x)) throw DataError("describe: non-finite value");
        sum.add(x);
    }
    Moments m;
    m.count = values.size();
    const double n = double(values.size());
    m.mean = sum.value() / n;
    detail::CompensatedSum s2, s3;
    for (double x : values) {
        const double d = x - m.mean;
        s2.add(d * d);
        s3.add(d * d * d);
    }
    const double m2 = s2.value() / n;
    const double m3 = s3.value() / n;
    m.stddev = m2 > 0 ? std::sqrt(m2) : 0.0;
    m.skewness_defined = values.size() >= 3 && m2 > 0;
    if (m.skewness_defined) m.skewness = m3 / (m2 * std::sqrt(m2));
    return m;
}

struct FieldStats {
    std::string field_id;
    Moments moments;
    std::uint64_t n_papers = 0;    // equals moments.count
    std::uint64_t n_journals = 0;  // distinct journals contributing papers
    std::set<DocType> doc_filter;
};

inline FieldStats field_stats(const Corpus& corpus, std::string_view field_id,
                              const std::set<DocType>& allowed) {
    if (allowed.empty()) throw DataError("field_stats: empty doc_type filter");
    std::vector<double> cites;
    std::set<std::string_view> journals;
    for (const Paper* p : papers_in_field(corpus, field_id)) {
        if (!allowed.count(p->doc_type)) continue;
        cites.push_back(double(p->citations));
        journals.insert(p->journal_id);
    }
    if (cites.empty())
        throw DataError("field \"" + std::string(field_id) +
                        "\" has no papers under the document-type filter");
    FieldStats fs;
    fs.field_id = std::string(field_id);
    fs.moments = describe(cites);
    fs.n_papers = fs.moments.count;
    fs.n_journals = journals.size();
    fs.doc_filter = allowed;
    return fs;
}

namespace detail {

// Pairs i<j with v[i] > v[j], counted by a bottom-up stable merge sort.
// Leaves v sorted ascending.
inline std::uint64_t merge_count_inversions(std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> buf(n);
    std::uint64_t inversions = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo + width < n; lo += 2 * width) {
            const std::size_t mid = lo + width;
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[j] < v[i]) {
                    inversions += mid - i;
                    buf[k++] = v[j++];
                } else {
                    buf[k++] = v[i++];
                }
            }
            while (i < mid) buf[k++] = v[i++];
            while (j < hi) buf[k++] = v[j++];
            std::copy(buf.begin() + std::ptrdiff_t(lo), buf.begin() + std::ptrdiff_t(hi),
                      v.begin() + std::ptrdiff_t(lo));
        }
    }
    return inversions;
}

// Sum of t*(t-1)/2 over runs of equal values; expects sorted input.
inline std::uint64_t tied_pairs_sorted(const std::vector<double>& v) {
    std::uint64_t pairs = 0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i + 1;
        while (j < v.size() && v[j] == v[i]) ++j;
        const std::uint64_t run = j - i;
        pairs += run * (run - 1) / 2;
        i = j;
    }
    return pairs;
}

}  // namespace detail

// Kendall tau-b over paired sequences. Ties get the standard tau-b
// correction; if either sequence is entirely tied the coefficient is
// undefined and this throws. Runs in O(n log n).
inline double kendall_tau(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DataError("kendall_tau: sequences differ in length");
    const std::size_t n = a.size();
    if (n < 2) throw DataError("kendall_tau: needs at least 2 pairs");
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(a[i]) || !std::isfinite(b[i]))
            throw DataError("kendall_tau: non-finite value");

    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::sort(idx.begin(), idx.end(), [&](std::uint32_t x, std::uint32_t y) {
        if (a[x] != a[y]) return a[x] < a[y];
        return b[x] < b[y];
    });

    // ties within a (n1) and within both (n3), from runs in the sorted order
    std::uint64_t n1 = 0, n3 = 0;
    {
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i + 1;
            while (j < n && a[idx[j]] == a[idx[i]]) ++j;
            const std::uint64_t run = j - i;
            n1 += run * (run - 1) / 2;
            std::size_t k = i;
            while (k < j) {
                std::size_t l = k + 1;
                while (l < j && b[idx[l]] == b[idx[k]]) ++l;
                const std::uint64_t both = l - k;
                n3 += both * (both - 1) / 2;
                k = l;
            }
            i = j;
        }
    }

    std::vector<double> bs(n);
    for (std::size_t i = 0; i < n; ++i) bs[i] = b[idx[i]];
    const std::uint64_t discordant = detail::merge_count_inversions(bs);
    const std::uint64_t n2 = detail::tied_pairs_sorted(bs);  // bs is sorted now

    const std::uint64_t n0 = std::uint64_t(n) * (n - 1) / 2;
    if (n1 == n0 || n2 == n0)
        throw DataError("kendall_tau: undefined, a sequence is entirely tied");
    const std::uint64_t concordant = n0 - n1 - n2 + n3 - discordant;
    const std::int64_t diff = std::int64_t(concordant) - std::int64_t(discordant);
    return double(diff) / std::sqrt(double(n0 - n1) * double(n0 - n2));
}

}  // namespace phindex
