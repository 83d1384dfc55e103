#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "editseq/metrics.hpp"
#include "editseq/model_types.hpp"
#include "editseq/rng.hpp"

namespace editseq {

// Token table with fixed special ids. Non-special tokens are assigned ids
// in sorted order; tokens under the count threshold map to unk.
struct Vocab {
    static constexpr int64_t kPad = 0;
    static constexpr int64_t kStart = 1;
    static constexpr int64_t kEnd = 2;
    static constexpr int64_t kUnk = 3;

    std::vector<std::string> id_to_token;
    std::unordered_map<std::string, int64_t> token_to_id;
    int min_count = 3;

    int64_t size() const { return static_cast<int64_t>(id_to_token.size()); }
    int64_t id(const std::string& token) const;
    const std::string& token(int64_t id) const;
    std::vector<int64_t> encode(const Sentence& tokens) const;
    Sentence decode(std::span<const int64_t> ids) const;
};

struct Example {
    int64_t image_id = 0;
    Sentence truth;
    Sentence existing;
    std::vector<Sentence> references;
    uint64_t feature_seed = 0;
};

enum class CorruptionKind { Clean, Repetition, Substitution, Drop };
const char* corruption_name(CorruptionKind kind);

// Recovers the corruption class from a (truth, existing) pair.
CorruptionKind classify_corruption(const Sentence& truth, const Sentence& existing);

struct GrammarParams {
    double p_repetition = 0.4;
    double p_substitution = 0.3;
    double p_drop = 0.2;  // remainder is left clean
    int num_references = 3;
};

// Deterministic template-grammar corpus: truth captions of the form
// "a <adj> <noun> <rel> a <noun>" with distinct nouns, an existing caption
// derived by seeded corruption, and per-example feature seeds.
std::vector<Example> generate_corpus(uint64_t seed, int64_t size,
                                     const GrammarParams& params = {});

// Word pools of the template grammar, exposed for tests and the stats
// report.
const std::vector<std::string>& grammar_adjectives();
const std::vector<std::string>& grammar_nouns();
const std::vector<std::string>& grammar_relations();

// Content nouns of a caption in grammar order.
Sentence content_nouns(const Sentence& caption);

// Pseudo visual features: one deterministic hash-derived vector per unique
// truth content noun plus seeded distractors, k vectors total, in an order
// shuffled from the feature seed.
VisualFeatures make_features(const Sentence& truth, uint64_t feature_seed, int64_t k, int64_t d_v);

Vocab build_vocab(const std::vector<Example>& corpus, int min_count = 3);

// One JSON object per line with fields image_id, truth, existing,
// references, feature_seed. Features are regenerated from the seed rather
// than stored.
void write_corpus(const std::string& path, const std::vector<Example>& corpus);
std::vector<Example> read_corpus(const std::string& path);

struct Batch {
    std::vector<std::vector<int64_t>> truth_ids;     // padded with kPad
    std::vector<std::vector<int64_t>> existing_ids;  // padded with kPad
    std::vector<int64_t> truth_lengths;
    std::vector<int64_t> existing_lengths;
    std::vector<size_t> example_indices;  // rows into the source corpus
    int64_t size() const { return static_cast<int64_t>(truth_ids.size()); }
};

// Splits examples into batches of `batch_size` (the final batch may be
// shorter), padding to the per-batch maximum length, rows ordered by
// descending truth length within each batch. `shuffle`, when non-null,
// permutes the example order first.
std::vector<Batch> make_batches(const std::vector<Example>& examples, const Vocab& vocab,
                                int64_t batch_size, Rng* shuffle = nullptr);

}  // namespace editseq
