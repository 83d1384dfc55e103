#include "editseq/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace editseq {

namespace {

// 14 adjectives (paired for reference paraphrases), 20 nouns, 10 relations
// and the determiner: 45 grammar tokens, ~50 with the specials.
const std::vector<std::string> kAdjectives = {
    "red",  "blue",  "green", "yellow", "small", "tiny", "big",
    "huge", "old",   "worn",  "new",    "shiny", "dark", "pale"};
const std::vector<std::string> kNouns = {
    "box",  "table", "chair", "ball",  "dog",  "cat",  "tree",  "car",  "book", "cup",
    "lamp", "bird",  "fish",  "house", "door", "glass", "plate", "shoe", "hat",  "clock"};
const std::vector<std::string> kRelations = {
    "on", "under", "near", "behind", "beside", "above", "below", "with", "by", "inside"};

constexpr uint64_t kNounFeatureSalt = 0x5eedf00dcafe1234ull;

size_t pool_index(const std::vector<std::string>& pool, const std::string& token) {
    for (size_t i = 0; i < pool.size(); ++i) {
        if (pool[i] == token) return i;
    }
    throw std::invalid_argument("token not in grammar pool: " + token);
}

// Paraphrase partner: the neighbor inside the pool's adjacent pair.
const std::string& partner(const std::vector<std::string>& pool, const std::string& token) {
    size_t i = pool_index(pool, token);
    size_t j = i ^ 1;
    return j < pool.size() ? pool[j] : pool[i];
}

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Tensor unit_gaussian_vector(uint64_t seed, int64_t d_v) {
    Rng rng(seed);
    std::vector<double> v(static_cast<size_t>(d_v));
    double norm_sq = 0.0;
    for (double& x : v) {
        x = rng.normal();
        norm_sq += x * x;
    }
    double inv_norm = 1.0 / std::sqrt(std::max(norm_sq, 1e-300));
    for (double& x : v) x *= inv_norm;
    return Tensor::from({d_v}, std::move(v));
}

std::string join(const Sentence& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

Sentence split(const std::string& text) {
    Sentence tokens;
    std::istringstream in(text);
    std::string token;
    while (in >> token) tokens.push_back(token);
    return tokens;
}

}  // namespace

const std::vector<std::string>& grammar_adjectives() { return kAdjectives; }
const std::vector<std::string>& grammar_nouns() { return kNouns; }
const std::vector<std::string>& grammar_relations() { return kRelations; }

Sentence content_nouns(const Sentence& caption) {
    Sentence nouns;
    for (const std::string& token : caption) {
        for (const std::string& noun : kNouns) {
            if (token == noun) {
                nouns.push_back(token);
                break;
            }
        }
    }
    return nouns;
}

const char* corruption_name(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::Clean: return "clean";
        case CorruptionKind::Repetition: return "repetition";
        case CorruptionKind::Substitution: return "substitution";
        case CorruptionKind::Drop: return "drop";
    }
    return "unknown";
}

CorruptionKind classify_corruption(const Sentence& truth, const Sentence& existing) {
    if (existing == truth) return CorruptionKind::Clean;
    if (existing.size() < truth.size()) return CorruptionKind::Drop;
    // Same length: a noun duplicated in the corrupted caption but not in the
    // truth marks a repetition.
    auto noun_counts = [](const Sentence& s) {
        std::unordered_map<std::string, int> counts;
        for (const std::string& noun : content_nouns(s)) ++counts[noun];
        return counts;
    };
    auto truth_counts = noun_counts(truth);
    for (const auto& [noun, count] : noun_counts(existing)) {
        if (count >= 2 && truth_counts[noun] < 2) return CorruptionKind::Repetition;
    }
    return CorruptionKind::Substitution;
}

std::vector<Example> generate_corpus(uint64_t seed, int64_t size, const GrammarParams& params) {
    if (size < 1) throw std::invalid_argument("generate_corpus: size must be >= 1");
    if (params.num_references < 1 || params.num_references > 5) {
        throw std::invalid_argument("generate_corpus: num_references must be in 1..5");
    }
    Rng rng(seed);
    std::vector<Example> corpus;
    corpus.reserve(static_cast<size_t>(size));
    for (int64_t i = 0; i < size; ++i) {
        Example ex;
        ex.image_id = i;
        const std::string& adj = kAdjectives[rng.below(kAdjectives.size())];
        const std::string& noun1 = kNouns[rng.below(kNouns.size())];
        std::string noun2 = kNouns[rng.below(kNouns.size())];
        while (noun2 == noun1) noun2 = kNouns[rng.below(kNouns.size())];
        const std::string& rel = kRelations[rng.below(kRelations.size())];
        ex.truth = {"a", adj, noun1, rel, "a", noun2};

        // References: the truth plus paraphrases swapping the adjective and
        // the relation for their pool partners.
        ex.references.push_back(ex.truth);
        if (params.num_references >= 2) {
            Sentence variant = ex.truth;
            variant[1] = partner(kAdjectives, adj);
            ex.references.push_back(variant);
        }
        if (params.num_references >= 3) {
            Sentence variant = ex.truth;
            variant[3] = partner(kRelations, rel);
            ex.references.push_back(variant);
        }
        if (params.num_references >= 4) {
            Sentence variant = ex.truth;
            variant[1] = partner(kAdjectives, adj);
            variant[3] = partner(kRelations, rel);
            ex.references.push_back(variant);
        }
        if (params.num_references >= 5) {
            Sentence variant = ex.truth;
            std::swap(variant[2], variant[5]);  // "a adj n2 rel a n1"
            ex.references.push_back(variant);
        }

        double u = rng.uniform();
        ex.existing = ex.truth;
        if (u < params.p_repetition) {
            ex.existing[5] = noun1;  // "a sandwich on a table with a table"
        } else if (u < params.p_repetition + params.p_substitution) {
            size_t slot = rng.below(4);
            auto substitute = [&rng](const std::vector<std::string>& pool, std::string& word) {
                std::string repl = pool[rng.below(pool.size())];
                while (repl == word) repl = pool[rng.below(pool.size())];
                word = repl;
            };
            if (slot == 0) substitute(kAdjectives, ex.existing[1]);
            else if (slot == 1) substitute(kNouns, ex.existing[2]);
            else if (slot == 2) substitute(kRelations, ex.existing[3]);
            else substitute(kNouns, ex.existing[5]);
        } else if (u < params.p_repetition + params.p_substitution + params.p_drop) {
            size_t slot = rng.below(ex.existing.size());
            ex.existing.erase(ex.existing.begin() + static_cast<long>(slot));
        }

        ex.feature_seed = rng.raw();
        corpus.push_back(std::move(ex));
    }
    return corpus;
}

VisualFeatures make_features(const Sentence& truth, uint64_t feature_seed, int64_t k,
                             int64_t d_v) {
    Sentence nouns = content_nouns(truth);
    std::vector<std::string> unique_nouns;
    for (const std::string& noun : nouns) {
        if (std::find(unique_nouns.begin(), unique_nouns.end(), noun) == unique_nouns.end()) {
            unique_nouns.push_back(noun);
        }
    }
    if (static_cast<int64_t>(unique_nouns.size()) > k) {
        throw std::invalid_argument("make_features: k=" + std::to_string(k) +
                                    " is smaller than the number of content nouns " +
                                    std::to_string(unique_nouns.size()));
    }
    std::vector<Tensor> vectors;
    vectors.reserve(static_cast<size_t>(k));
    for (const std::string& noun : unique_nouns) {
        vectors.push_back(unit_gaussian_vector(fnv1a64(noun) ^ kNounFeatureSalt, d_v));
    }
    Rng rng(feature_seed);
    while (static_cast<int64_t>(vectors.size()) < k) {
        vectors.push_back(unit_gaussian_vector(rng.raw(), d_v));
    }
    rng.shuffle(vectors);
    return VisualFeatures::from_vectors(std::move(vectors));
}

int64_t Vocab::id(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnk : it->second;
}

const std::string& Vocab::token(int64_t id) const {
    if (id < 0 || id >= size()) {
        throw std::invalid_argument("Vocab::token: id " + std::to_string(id) + " out of range");
    }
    return id_to_token[static_cast<size_t>(id)];
}

std::vector<int64_t> Vocab::encode(const Sentence& tokens) const {
    std::vector<int64_t> ids;
    ids.reserve(tokens.size());
    for (const std::string& t : tokens) ids.push_back(id(t));
    return ids;
}

Sentence Vocab::decode(std::span<const int64_t> ids) const {
    Sentence tokens;
    tokens.reserve(ids.size());
    for (int64_t i : ids) tokens.push_back(token(i));
    return tokens;
}

Vocab build_vocab(const std::vector<Example>& corpus, int min_count) {
    if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");
    std::unordered_map<std::string, int64_t> counts;
    for (const Example& ex : corpus) {
        for (const std::string& t : ex.truth) ++counts[t];
        for (const std::string& t : ex.existing) ++counts[t];
    }
    std::vector<std::string> kept;
    for (const auto& [token, count] : counts) {
        if (count >= min_count) kept.push_back(token);
    }
    std::sort(kept.begin(), kept.end());
    Vocab vocab;
    vocab.min_count = min_count;
    vocab.id_to_token = {"<pad>", "<s>", "</s>", "<unk>"};
    for (const std::string& t : kept) {
        vocab.token_to_id[t] = vocab.size();
        vocab.id_to_token.push_back(t);
    }
    return vocab;
}

void write_corpus(const std::string& path, const std::vector<Example>& corpus) {
    std::ofstream out(path);
    if (!out.good()) throw std::runtime_error("write_corpus: cannot open " + path);
    for (const Example& ex : corpus) {
        nlohmann::json record;
        record["image_id"] = ex.image_id;
        record["truth"] = join(ex.truth);
        record["existing"] = join(ex.existing);
        std::vector<std::string> refs;
        for (const Sentence& r : ex.references) refs.push_back(join(r));
        record["references"] = refs;
        record["feature_seed"] = ex.feature_seed;
        out << record.dump() << "\n";
    }
    if (!out.good()) throw std::runtime_error("write_corpus: write failed for " + path);
}

std::vector<Example> read_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) throw std::runtime_error("read_corpus: cannot open " + path);
    std::vector<Example> corpus;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json record = nlohmann::json::parse(line);
        Example ex;
        ex.image_id = record.at("image_id").get<int64_t>();
        ex.truth = split(record.at("truth").get<std::string>());
        ex.existing = split(record.at("existing").get<std::string>());
        for (const auto& r : record.at("references")) {
            ex.references.push_back(split(r.get<std::string>()));
        }
        ex.feature_seed = record.at("feature_seed").get<uint64_t>();
        if (ex.existing.empty()) {
            throw std::runtime_error("read_corpus: example " + std::to_string(ex.image_id) +
                                     " has an empty existing caption");
        }
        corpus.push_back(std::move(ex));
    }
    return corpus;
}

std::vector<Batch> make_batches(const std::vector<Example>& examples, const Vocab& vocab,
                                int64_t batch_size, Rng* shuffle) {
    if (batch_size < 1) throw std::invalid_argument("make_batches: batch_size must be >= 1");
    std::vector<size_t> order(examples.size());
    std::iota(order.begin(), order.end(), size_t{0});
    if (shuffle) shuffle->shuffle(order);

    std::vector<Batch> batches;
    for (size_t begin = 0; begin < order.size(); begin += static_cast<size_t>(batch_size)) {
        size_t end = std::min(order.size(), begin + static_cast<size_t>(batch_size));
        std::vector<size_t> rows(order.begin() + static_cast<long>(begin),
                                 order.begin() + static_cast<long>(end));
        std::sort(rows.begin(), rows.end(), [&](size_t a, size_t b) {
            if (examples[a].truth.size() != examples[b].truth.size()) {
                return examples[a].truth.size() > examples[b].truth.size();
            }
            return a < b;
        });
        Batch batch;
        int64_t max_truth = 0, max_existing = 0;
        for (size_t row : rows) {
            max_truth = std::max<int64_t>(max_truth, static_cast<int64_t>(examples[row].truth.size()));
            max_existing = std::max<int64_t>(max_existing, static_cast<int64_t>(examples[row].existing.size()));
        }
        for (size_t row : rows) {
            const Example& ex = examples[row];
            std::vector<int64_t> truth_ids = vocab.encode(ex.truth);
            std::vector<int64_t> existing_ids = vocab.encode(ex.existing);
            batch.truth_lengths.push_back(static_cast<int64_t>(truth_ids.size()));
            batch.existing_lengths.push_back(static_cast<int64_t>(existing_ids.size()));
            truth_ids.resize(static_cast<size_t>(max_truth), Vocab::kPad);
            existing_ids.resize(static_cast<size_t>(max_existing), Vocab::kPad);
            batch.truth_ids.push_back(std::move(truth_ids));
            batch.existing_ids.push_back(std::move(existing_ids));
            batch.example_indices.push_back(row);
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

}  // namespace editseq
