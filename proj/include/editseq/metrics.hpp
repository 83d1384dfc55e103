#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace editseq {

using Sentence = std::vector<std::string>;

// Lowercases, strips punctuation, splits on whitespace.
Sentence tokenize(const std::string& text);

// n-gram (n in 1..4) occurrence counts; the key is the tokens joined with
// an unprintable separator.
using NGramCounts = std::unordered_map<std::string, int64_t>;
NGramCounts count_ngrams(const Sentence& tokens, int n);

// Corpus-level BLEU-1..4: clipped modified n-gram precision summed across
// sentences, geometric mean up to n, brevity penalty against the closest
// reference length (ties toward the shorter reference).
std::array<double, 4> bleu_corpus(const std::vector<Sentence>& candidates,
                                  const std::vector<std::vector<Sentence>>& references);
std::array<double, 4> bleu_sentence(const Sentence& candidate,
                                    const std::vector<Sentence>& references);

// LCS F-measure with beta = 1.2, maximum over references.
double rouge_l(const Sentence& candidate, const std::vector<Sentence>& references,
               double beta = 1.2);
double rouge_l_corpus(const std::vector<Sentence>& candidates,
                      const std::vector<std::vector<Sentence>>& references, double beta = 1.2);

// idf = log(corpus size / document frequency), where the document frequency
// counts images whose reference set contains the n-gram. Built from the
// reference corpus only.
class IdfTable {
public:
    static IdfTable build(const std::vector<std::vector<Sentence>>& references_per_image,
                          int max_n = 4);
    double idf(const std::string& ngram_key) const;
    int64_t corpus_size() const { return corpus_size_; }
    int max_n() const { return max_n_; }

private:
    std::unordered_map<std::string, int64_t> document_frequency_;
    int64_t corpus_size_ = 0;
    int max_n_ = 4;
};

struct CiderResult {
    std::vector<double> per_image;
    double mean = 0.0;
};

// CIDEr-D: per-n clipped tf-idf cosine with a Gaussian length penalty,
// averaged over n = 1..4 and references, scaled by 10.
CiderResult cider_d(const std::vector<Sentence>& candidates,
                    const std::vector<std::vector<Sentence>>& references_per_image,
                    const IdfTable& idf, double sigma = 6.0, int max_n = 4);
double cider_d_sentence(const Sentence& candidate, const std::vector<Sentence>& references,
                        const IdfTable& idf, double sigma = 6.0, int max_n = 4);

}  // namespace editseq
