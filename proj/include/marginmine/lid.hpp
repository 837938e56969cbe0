#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace marginmine {

// Character n-gram naive Bayes over codepoints, n in 1..3, additive
// smoothing. Each per-language table covers the full cross-language
// vocabulary for its n, so its probabilities sum to 1; codepoint sequences
// outside the vocabulary score at the floor.
struct LidModel {
    struct LangTables {
        std::string lang;
        // index n-1: ngram (UTF-8 of lowercased codepoints) -> log prob
        std::array<std::unordered_map<std::string, double>, 3> logp;
        std::array<double, 3> floor_logp{};
    };
    std::vector<LangTables> langs;  // sorted by language code
    double alpha = 0.5;
};

// labeled: (sentence, language code). Every declared language needs at least
// one example.
LidModel train_lid(
    const std::vector<std::pair<std::string, std::string>>& labeled,
    double alpha);

struct LidPrediction {
    std::string lang;
    double confidence = 0.0;  // softmax over per-language log scores
};

LidPrediction classify(const LidModel& model, const std::string& sentence);

struct DroppedSentence {
    std::size_t index = 0;
    std::string text;
    std::string predicted;
    double confidence = 0.0;
};

struct LidFilterResult {
    std::vector<std::string> kept;
    std::vector<std::size_t> kept_indices;
    std::vector<DroppedSentence> dropped;
};

// Drops sentences whose argmax language differs from `expected`. The model
// must cover the expected language.
LidFilterResult lid_filter(const std::vector<std::string>& sentences,
                           const std::string& expected, const LidModel& model,
                           std::size_t threads = 1);

// External-label alternative: one language code per sentence, same order.
LidFilterResult lid_filter_with_labels(
    const std::vector<std::string>& sentences, const std::string& expected,
    const std::vector<std::string>& labels);

// One language code per line, aligned with the sentence file.
std::vector<std::string> load_labels(const std::filesystem::path& path);

// Seed corpus embedded in the binary: a few everyday sentences for each of
// a dozen languages.
const std::vector<std::pair<std::string, std::string>>& builtin_lid_corpus();

// Model trained on the seed corpus with alpha 0.5 (cached after first call).
const LidModel& builtin_lid_model();

} // namespace marginmine
