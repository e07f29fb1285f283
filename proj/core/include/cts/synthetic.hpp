#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string_view>

namespace cts::synth {

/// Parameters of the stand-in corpus used when no real data is at hand.
///
/// Each record draws, independently:
///   label    Bernoulli(0.5), written as "true"/"fake"
///   date     uniform over 2016-01-01 .. 2017-12-31
///   subject  politics .25, world .20, business .20, technology .15,
///            health .10, sports .10
///   source   one of 8 outlets; 70% of true items come from the four
///            "wire" outlets and 70% of fake items from the other four
///   title    two subject topic words, two sentiment words and
///            `filler_words` neutral words in random order. Each sentiment
///            word is the positive side of one of the first
///            `sentiment_pairs` lexicon pairs with probability
///            `sentiment_agreement` for true items and its complement for
///            fake ones, else the negative side.
struct SyntheticConfig {
  std::size_t n = 5000;
  std::size_t k = 10;  // only checked: n must be at least 20 k
  std::uint64_t seed = 7;
  std::size_t filler_vocabulary = 300;
  std::size_t filler_words = 4;
  /// Sentiment words come from the first this-many built-in lexicon pairs.
  std::size_t sentiment_pairs = 12;
  double sentiment_agreement = 0.75;
};

/// First comment line of every generated file.
inline constexpr std::string_view kSyntheticMarker = "# cts synthetic corpus";

/// Writes a CSV with id,title,subject,source,date,label columns after a
/// block of '#' comment lines describing the draw. Throws ConfigError when
/// n < 20 k, k < 2, the filler vocabulary is empty or
/// sentiment_pairs is not in [1, 40] or sentiment_agreement is not in
/// [0.5, 1].
void generate(const SyntheticConfig& config, std::ostream& out);
void generate(const SyntheticConfig& config, const std::filesystem::path& path);

/// True when the file starts with kSyntheticMarker.
bool is_synthetic(const std::filesystem::path& path);

}  // namespace cts::synth
