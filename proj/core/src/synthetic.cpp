#include "cts/synthetic.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include "cts/bias_lab.hpp"
#include "cts/csv.hpp"
#include "cts/error.hpp"
#include "cts/random.hpp"

namespace cts::synth {

namespace {

struct Topic {
  std::string_view subject;
  double weight;
  std::array<std::string_view, 10> words;
};

constexpr std::array<Topic, 6> kTopics{{
    {"politics", 0.25,
     {"senate", "election", "congress", "governor", "campaign", "ballot", "policy", "minister",
      "parliament", "vote"}},
    {"world", 0.20,
     {"border", "embassy", "summit", "treaty", "refugees", "ceasefire", "diplomats", "alliance",
      "sanctions", "envoy"}},
    {"business", 0.20,
     {"market", "shares", "earnings", "merger", "investors", "tariff", "bank", "retail", "profits",
      "startup"}},
    {"technology", 0.15,
     {"software", "chip", "robot", "app", "network", "cloud", "privacy", "drone", "satellite",
      "battery"}},
    {"health", 0.10,
     {"vaccine", "hospital", "virus", "clinic", "diet", "cancer", "doctors", "trial", "insurance",
      "flu"}},
    {"sports", 0.10,
     {"league", "coach", "striker", "playoffs", "stadium", "olympic", "season", "tennis", "marathon",
      "champion"}},
}};

constexpr std::array<std::string_view, 4> kWireSources{"reuters-wire", "ap-desk", "city-ledger",
                                                        "global-times"};
constexpr std::array<std::string_view, 4> kTabloidSources{"daily-buzz", "truth-now", "viral-report",
                                                           "patriot-post"};

constexpr std::array<std::string_view, 12> kMonths{"January", "February", "March",     "April",
                                                   "May",     "June",     "July",      "August",
                                                   "September", "October", "November", "December"};

std::size_t pick_topic(Rng& rng) {
  double u = rng.uniform();
  for (std::size_t i = 0; i < kTopics.size(); ++i) {
    if (u < kTopics[i].weight) return i;
    u -= kTopics[i].weight;
  }
  return kTopics.size() - 1;
}

std::string filler(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "term%03zu", index);
  return buf;
}

// Alternates ISO and long-form dates so both parsers see traffic.
std::string format_date(Date d, bool long_form) {
  const std::string iso = d.to_iso();
  if (!long_form) return iso;
  const int month = std::stoi(iso.substr(5, 2));
  const int day = std::stoi(iso.substr(8, 2));
  return std::string(kMonths[month - 1]) + " " + std::to_string(day) + ", " + iso.substr(0, 4);
}

}  // namespace

void generate(const SyntheticConfig& config, std::ostream& out) {
  if (config.k < 2) throw ConfigError("synthetic corpus needs k >= 2");
  if (config.n < 20 * config.k) {
    throw ConfigError("synthetic corpus needs n >= 20 k (n = " + std::to_string(config.n) +
                      ", k = " + std::to_string(config.k) + ")");
  }
  if (config.filler_vocabulary == 0) throw ConfigError("synthetic filler vocabulary is empty");
  const auto& lexicon = bias::default_lexicon();
  if (config.sentiment_pairs == 0 || config.sentiment_pairs > lexicon.size()) {
    throw ConfigError("synthetic sentiment_pairs must lie in [1, " + std::to_string(lexicon.size()) + "]");
  }
  if (!(config.sentiment_agreement >= 0.5 && config.sentiment_agreement <= 1.0)) {
    throw ConfigError("synthetic sentiment_agreement must lie in [0.5, 1]");
  }

  const Date first = *Date::parse("2016-01-01");
  const Date last = *Date::parse("2017-12-31");
  const auto span_days = static_cast<std::uint64_t>(last.days - first.days + 1);

  out << kSyntheticMarker << "\n"
      << "# seed=" << config.seed << " n=" << config.n << " k=" << config.k
      << " filler_vocabulary=" << config.filler_vocabulary
      << " filler_words=" << config.filler_words << " sentiment_pairs=" << config.sentiment_pairs
      << " sentiment_agreement=" << config.sentiment_agreement << "\n"
      << "# label ~ Bernoulli(0.5); date ~ uniform 2016-01-01..2017-12-31\n"
      << "# subject ~ politics .25, world .20, business .20, technology .15, health .10, sports .10\n"
      << "# source: 70% label-aligned outlet group (true: wire outlets, fake: tabloid outlets)\n"
      << "# title: 2 topic words + 2 sentiment words (positive w.p. agreement if true,"
         " 1 - agreement if fake) + filler words, shuffled\n"
      << "id,title,subject,source,date,label\n";

  Rng rng(derive_seed(config.seed, "synthetic"));
  for (std::size_t i = 0; i < config.n; ++i) {
    const int label = rng.bernoulli(0.5) ? 1 : 0;
    const Date date{first.days + static_cast<std::int32_t>(rng.uniform_index(span_days))};
    const auto& topic = kTopics[pick_topic(rng)];

    const bool aligned_source = rng.bernoulli(0.7);
    const bool wire = (label == 1) == aligned_source;
    const auto& pool = wire ? kWireSources : kTabloidSources;
    const auto source = pool[rng.uniform_index(pool.size())];

    std::vector<std::string> words;
    for (int w = 0; w < 2; ++w) words.emplace_back(topic.words[rng.uniform_index(topic.words.size())]);
    for (int w = 0; w < 2; ++w) {
      const auto& pair = lexicon[rng.uniform_index(config.sentiment_pairs)];
      const bool positive = rng.bernoulli(label == 1 ? config.sentiment_agreement : 1.0 - config.sentiment_agreement);
      words.push_back(positive ? pair.term : pair.replacement);
    }
    for (std::size_t w = 0; w < config.filler_words; ++w) {
      words.push_back(filler(rng.uniform_index(config.filler_vocabulary)));
    }
    rng.shuffle(std::span<std::string>(words));

    // Raw titles carry capitals and punctuation for the cleaner to strip.
    std::string title;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w) title += ' ';
      std::string word = words[w];
      if (w == 0 && !word.empty()) word[0] = static_cast<char>(word[0] - 'a' + 'A');
      title += word;
      if (w == 1 && rng.bernoulli(0.3)) title += ':';
    }
    title += rng.bernoulli(0.2) ? "!" : ".";

    char id[24];
    std::snprintf(id, sizeof id, "syn-%06zu", i);
    out << id << ',' << csv::escape(title) << ',' << topic.subject << ',' << source << ','
        << csv::escape(format_date(date, rng.bernoulli(0.5))) << ','
        << (label == 1 ? "true" : "fake") << "\n";
  }
}

void generate(const SyntheticConfig& config, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  generate(config, out);
  if (!out) throw DataError("write to '" + path.string() + "' failed");
}

bool is_synthetic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string first;
  if (!in || !std::getline(in, first)) return false;
  return first.rfind(kSyntheticMarker, 0) == 0;
}

}  // namespace cts::synth
