#include "editseq/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace editseq {

namespace {
constexpr char kSep = '\x1f';
}

Sentence tokenize(const std::string& text) {
    Sentence tokens;
    std::string current;
    for (char raw : text) {
        unsigned char c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (std::isspace(c)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        }
        // Punctuation is dropped.
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

NGramCounts count_ngrams(const Sentence& tokens, int n) {
    NGramCounts counts;
    if (n < 1 || static_cast<size_t>(n) > tokens.size()) return counts;
    for (size_t i = 0; i + n <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int j = 1; j < n; ++j) {
            key.push_back(kSep);
            key += tokens[i + j];
        }
        ++counts[key];
    }
    return counts;
}

// ---- BLEU ------------------------------------------------------------------

namespace {

struct BleuAccumulator {
    std::array<int64_t, 4> matched{};
    std::array<int64_t, 4> total{};
    int64_t candidate_len = 0;
    int64_t effective_ref_len = 0;

    void add(const Sentence& cand, const std::vector<Sentence>& refs) {
        if (refs.empty()) throw std::invalid_argument("bleu: empty reference set");
        candidate_len += static_cast<int64_t>(cand.size());
        int64_t best_len = static_cast<int64_t>(refs[0].size());
        for (const Sentence& r : refs) {
            int64_t len = static_cast<int64_t>(r.size());
            int64_t diff = std::abs(len - static_cast<int64_t>(cand.size()));
            int64_t best_diff = std::abs(best_len - static_cast<int64_t>(cand.size()));
            if (diff < best_diff || (diff == best_diff && len < best_len)) best_len = len;
        }
        effective_ref_len += best_len;
        for (int n = 1; n <= 4; ++n) {
            NGramCounts cn = count_ngrams(cand, n);
            NGramCounts best;
            for (const Sentence& r : refs) {
                for (const auto& [g, c] : count_ngrams(r, n)) {
                    auto it = best.find(g);
                    if (it == best.end() || it->second < c) best[g] = c;
                }
            }
            for (const auto& [g, c] : cn) {
                total[n - 1] += c;
                auto it = best.find(g);
                if (it != best.end()) matched[n - 1] += std::min(c, it->second);
            }
        }
    }

    std::array<double, 4> scores() const {
        double bp = 1.0;
        if (candidate_len == 0) {
            bp = 0.0;
        } else if (candidate_len <= effective_ref_len) {
            bp = std::exp(1.0 - static_cast<double>(effective_ref_len) /
                                    static_cast<double>(candidate_len));
        }
        std::array<double, 4> out{};
        for (int k = 1; k <= 4; ++k) {
            double log_sum = 0.0;
            bool ok = true;
            for (int n = 1; n <= k; ++n) {
                if (total[n - 1] == 0 || matched[n - 1] == 0) {
                    ok = false;
                    break;
                }
                log_sum += std::log(static_cast<double>(matched[n - 1]) /
                                    static_cast<double>(total[n - 1]));
            }
            out[k - 1] = ok ? bp * std::exp(log_sum / k) : 0.0;
        }
        return out;
    }
};

}  // namespace

std::array<double, 4> bleu_corpus(const std::vector<Sentence>& candidates,
                                  const std::vector<std::vector<Sentence>>& references) {
    if (candidates.size() != references.size()) {
        throw std::invalid_argument("bleu_corpus: candidate/reference count mismatch");
    }
    BleuAccumulator acc;
    for (size_t i = 0; i < candidates.size(); ++i) acc.add(candidates[i], references[i]);
    return acc.scores();
}

std::array<double, 4> bleu_sentence(const Sentence& candidate,
                                    const std::vector<Sentence>& references) {
    BleuAccumulator acc;
    acc.add(candidate, references);
    return acc.scores();
}

// ---- ROUGE-L ---------------------------------------------------------------

namespace {

int64_t lcs_length(const Sentence& a, const Sentence& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<int64_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (size_t i = 1; i <= a.size(); ++i) {
        for (size_t j = 1; j <= b.size(); ++j) {
            cur[j] = (a[i - 1] == b[j - 1]) ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

double rouge_l(const Sentence& candidate, const std::vector<Sentence>& references, double beta) {
    if (references.empty()) throw std::invalid_argument("rouge_l: empty reference set");
    double best = 0.0;
    for (const Sentence& ref : references) {
        int64_t lcs = lcs_length(candidate, ref);
        if (lcs == 0) continue;
        double precision = static_cast<double>(lcs) / static_cast<double>(candidate.size());
        double recall = static_cast<double>(lcs) / static_cast<double>(ref.size());
        double f = (1.0 + beta * beta) * precision * recall / (recall + beta * beta * precision);
        best = std::max(best, f);
    }
    return best;
}

double rouge_l_corpus(const std::vector<Sentence>& candidates,
                      const std::vector<std::vector<Sentence>>& references, double beta) {
    if (candidates.size() != references.size()) {
        throw std::invalid_argument("rouge_l_corpus: candidate/reference count mismatch");
    }
    if (candidates.empty()) return 0.0;
    double total = 0.0;
    for (size_t i = 0; i < candidates.size(); ++i) total += rouge_l(candidates[i], references[i], beta);
    return total / static_cast<double>(candidates.size());
}

// ---- CIDEr-D ---------------------------------------------------------------

IdfTable IdfTable::build(const std::vector<std::vector<Sentence>>& references_per_image,
                         int max_n) {
    if (references_per_image.empty()) {
        throw std::invalid_argument("IdfTable::build: empty reference corpus");
    }
    IdfTable table;
    table.max_n_ = max_n;
    table.corpus_size_ = static_cast<int64_t>(references_per_image.size());
    for (const auto& refs : references_per_image) {
        std::unordered_map<std::string, bool> seen;
        for (const Sentence& ref : refs) {
            for (int n = 1; n <= max_n; ++n) {
                for (const auto& [g, c] : count_ngrams(ref, n)) seen[g] = true;
            }
        }
        for (const auto& [g, unused] : seen) ++table.document_frequency_[g];
    }
    return table;
}

double IdfTable::idf(const std::string& ngram_key) const {
    auto it = document_frequency_.find(ngram_key);
    double df = (it == document_frequency_.end()) ? 0.0 : static_cast<double>(it->second);
    return std::log(static_cast<double>(corpus_size_)) - std::log(std::max(1.0, df));
}

namespace {

struct TfidfVec {
    std::vector<std::unordered_map<std::string, double>> per_n;
    std::vector<double> norm;
    int64_t length = 0;
};

TfidfVec tfidf_vector(const Sentence& tokens, const IdfTable& idf, int max_n) {
    TfidfVec v;
    v.length = static_cast<int64_t>(tokens.size());
    v.per_n.resize(max_n);
    v.norm.resize(max_n, 0.0);
    for (int n = 1; n <= max_n; ++n) {
        for (const auto& [g, c] : count_ngrams(tokens, n)) {
            double w = static_cast<double>(c) * idf.idf(g);
            v.per_n[n - 1][g] = w;
            v.norm[n - 1] += w * w;
        }
        v.norm[n - 1] = std::sqrt(v.norm[n - 1]);
    }
    return v;
}

}  // namespace

double cider_d_sentence(const Sentence& candidate, const std::vector<Sentence>& references,
                        const IdfTable& idf, double sigma, int max_n) {
    if (references.empty()) throw std::invalid_argument("cider_d: image with no references");
    TfidfVec cand = tfidf_vector(candidate, idf, max_n);
    std::vector<double> acc(max_n, 0.0);
    for (const Sentence& ref : references) {
        TfidfVec rv = tfidf_vector(ref, idf, max_n);
        double delta = static_cast<double>(cand.length - rv.length);
        double penalty = std::exp(-delta * delta / (2.0 * sigma * sigma));
        for (int n = 0; n < max_n; ++n) {
            double dot = 0.0;
            for (const auto& [g, w] : cand.per_n[n]) {
                auto it = rv.per_n[n].find(g);
                if (it != rv.per_n[n].end()) dot += std::min(w, it->second) * it->second;
            }
            if (cand.norm[n] != 0.0 && rv.norm[n] != 0.0) dot /= cand.norm[n] * rv.norm[n];
            acc[n] += dot * penalty;
        }
    }
    double score = 0.0;
    for (int n = 0; n < max_n; ++n) score += acc[n];
    return score / max_n / static_cast<double>(references.size()) * 10.0;
}

CiderResult cider_d(const std::vector<Sentence>& candidates,
                    const std::vector<std::vector<Sentence>>& references_per_image,
                    const IdfTable& idf, double sigma, int max_n) {
    if (candidates.size() != references_per_image.size()) {
        throw std::invalid_argument("cider_d: candidate/reference count mismatch");
    }
    if (candidates.empty()) throw std::invalid_argument("cider_d: empty evaluation set");
    CiderResult result;
    result.per_image.reserve(candidates.size());
    double total = 0.0;
    for (size_t i = 0; i < candidates.size(); ++i) {
        double s = cider_d_sentence(candidates[i], references_per_image[i], idf, sigma, max_n);
        result.per_image.push_back(s);
        total += s;
    }
    result.mean = total / static_cast<double>(candidates.size());
    return result;
}

}  // namespace editseq
