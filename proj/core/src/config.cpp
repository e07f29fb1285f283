#include "cts/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cts/error.hpp"

namespace cts::pipeline {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view want) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) +
                    "' as " + std::string(want));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
    bad_value(key, v, "a number");
  }
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a non-negative integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  bad_value(key, v, "a boolean");
}

std::vector<double> to_doubles(std::string_view key, std::string_view v) {
  std::vector<double> out;
  if (v.empty()) return out;
  for (auto part : split(v, ',')) out.push_back(to_double(key, part));
  return out;
}

drift::AutoencoderVariant to_variant(std::string_view key, std::string_view v) {
  if (v == "plain") return drift::AutoencoderVariant::kPlain;
  if (v == "attention") return drift::AutoencoderVariant::kAttention;
  bad_value(key, v, "'plain' or 'attention'");
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value,
                                  const std::filesystem::path& base)>;

std::filesystem::path resolve(const std::filesystem::path& base, std::string_view v) {
  if (v.empty()) return {};
  std::filesystem::path p{std::string(v)};
  return p.is_absolute() ? p : base / p;
}

void add_autoencoder_keys(std::map<std::string, Setter, std::less<>>& keys, const std::string& prefix,
                          drift::AutoencoderConfig RunConfig::*member) {
  auto field = [member](RunConfig& c) -> drift::AutoencoderConfig& { return c.*member; };
  keys[prefix + ".variant"] = [field](RunConfig& c, auto k, auto v, auto&) { field(c).variant = to_variant(k, v); };
  keys[prefix + ".bottleneck"] = [field](RunConfig& c, auto k, auto v, auto&) { field(c).bottleneck_dim = to_u64(k, v); };
  keys[prefix + ".noise_sigma"] = [field](RunConfig& c, auto k, auto v, auto&) { field(c).noise_sigma = to_double(k, v); };
  keys[prefix + ".dropout"] = [field](RunConfig& c, auto k, auto v, auto&) { field(c).dropout = to_double(k, v); };
  keys[prefix + ".epochs"] = [field](RunConfig& c, auto k, auto v, auto&) { field(c).epochs = to_u64(k, v); };
  keys[prefix + ".step_size"] = [field](RunConfig& c, auto k, auto v, auto&) { field(c).step_size = to_double(k, v); };
  keys[prefix + ".batch_size"] = [field](RunConfig& c, auto k, auto v, auto&) { field(c).batch_size = to_u64(k, v); };
  keys[prefix + ".eta"] = [field](RunConfig& c, auto k, auto v, auto&) { field(c).eta = to_double(k, v); };
  keys[prefix + ".chunk"] = [field](RunConfig& c, auto k, auto v, auto&) { field(c).chunk = to_u64(k, v); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const auto table = [] {
    std::map<std::string, Setter, std::less<>> t;
    t["input.path"] = [](RunConfig& c, auto, auto v, auto& base) { c.input_path = resolve(base, v); };
    t["input.format"] = [](RunConfig& c, auto k, auto v, auto&) {
      if (v == "csv") c.input_format = ingest::InputFormat::kCsv;
      else if (v == "jsonl") c.input_format = ingest::InputFormat::kJsonLines;
      else bad_value(k, v, "'csv' or 'jsonl'");
    };
    t["schema.title"] = [](RunConfig& c, auto, auto v, auto&) { c.schema.title = v; };
    t["schema.subject"] = [](RunConfig& c, auto, auto v, auto&) { c.schema.subject = v; };
    t["schema.source"] = [](RunConfig& c, auto, auto v, auto&) { c.schema.source = v; };
    t["schema.date"] = [](RunConfig& c, auto, auto v, auto&) { c.schema.date = v; };
    t["schema.label"] = [](RunConfig& c, auto, auto v, auto&) { c.schema.label = v; };
    t["schema.id"] = [](RunConfig& c, auto, auto v, auto&) { c.schema.id = v; };
    t["schema.protected"] = [](RunConfig& c, auto, auto v, auto&) { c.schema.protected_group = v; };
    t["batches.k"] = [](RunConfig& c, auto k, auto v, auto&) { c.k = to_u64(k, v); };
    t["batches.clean_prefix"] = [](RunConfig& c, auto k, auto v, auto&) { c.clean_prefix = to_u64(k, v); };
    t["inject.enabled"] = [](RunConfig& c, auto k, auto v, auto&) { c.inject_enabled = to_bool(k, v); };
    t["inject.batches"] = [](RunConfig& c, auto, auto v, auto&) { c.inject_batches = parse_batch_list(v); };
    t["inject.subject"] = [](RunConfig& c, auto, auto v, auto&) { c.skew_subject = v; };
    t["inject.subject_factor"] = [](RunConfig& c, auto k, auto v, auto&) { c.skew_factor = to_double(k, v); };
    t["inject.framing_rate"] = [](RunConfig& c, auto k, auto v, auto&) { c.framing_rate = to_double(k, v); };
    t["inject.lexicon"] = [](RunConfig& c, auto, auto v, auto& base) { c.lexicon_path = resolve(base, v); };
    t["inject.label_drift"] = [](RunConfig& c, auto k, auto v, auto&) { c.label_drift = to_doubles(k, v); };
    t["features.dim"] = [](RunConfig& c, auto k, auto v, auto&) { c.features.dim = to_u64(k, v); };
    t["features.hash_seed"] = [](RunConfig& c, auto k, auto v, auto&) { c.features.hash_seed = to_u64(k, v); };
    t["model.n_trees"] = [](RunConfig& c, auto k, auto v, auto&) { c.model.n_trees = to_u64(k, v); };
    t["model.depth"] = [](RunConfig& c, auto k, auto v, auto&) { c.model.depth = to_u64(k, v); };
    t["model.learning_rate"] = [](RunConfig& c, auto k, auto v, auto&) { c.model.learning_rate = to_double(k, v); };
    t["model.early_stop_patience"] = [](RunConfig& c, auto k, auto v, auto&) { c.model.early_stop_patience = to_u64(k, v); };
    t["model.train_fraction"] = [](RunConfig& c, auto k, auto v, auto&) { c.model.train_fraction = to_double(k, v); };
    t["model.min_child_hessian"] = [](RunConfig& c, auto k, auto v, auto&) { c.model.min_child_hessian = to_double(k, v); };
    t["model.l2"] = [](RunConfig& c, auto k, auto v, auto&) { c.model.l2 = to_double(k, v); };
    t["model.validation_repeats"] = [](RunConfig& c, auto k, auto v, auto&) { c.model.validation_repeats = to_u64(k, v); };
    add_autoencoder_keys(t, "ae", &RunConfig::ae);
    add_autoencoder_keys(t, "tae", &RunConfig::tae);
    t["drift.weights"] = [](RunConfig& c, auto k, auto v, auto&) {
      const auto w = to_doubles(k, v);
      if (w.size() != 4) bad_value(k, v, "four comma-separated weights");
      std::copy(w.begin(), w.end(), c.drift_weights.values.begin());
    };
    t["trust.alpha"] = [](RunConfig& c, auto k, auto v, auto&) { c.trust_weights.alpha = to_double(k, v); };
    t["trust.beta"] = [](RunConfig& c, auto k, auto v, auto&) { c.trust_weights.beta = to_double(k, v); };
    t["trust.gamma"] = [](RunConfig& c, auto k, auto v, auto&) { c.trust_weights.gamma = to_double(k, v); };
    t["trust.delta"] = [](RunConfig& c, auto k, auto v, auto&) { c.trust_weights.delta = to_double(k, v); };
    t["trust.zeta"] = [](RunConfig& c, auto k, auto v, auto&) { c.trust_weights.zeta = to_double(k, v); };
    t["trust.lambda"] = [](RunConfig& c, auto k, auto v, auto&) { c.lambda = to_double(k, v); };
    t["trust.alert_threshold"] = [](RunConfig& c, auto k, auto v, auto&) { c.alert_threshold = to_double(k, v); };
    t["importance.repeats"] = [](RunConfig& c, auto k, auto v, auto&) { c.importance_repeats = to_u64(k, v); };
    t["run.seed"] = [](RunConfig& c, auto k, auto v, auto&) { c.seed = to_u64(k, v); };
    t["run.out"] = [](RunConfig& c, auto, auto v, auto& base) { c.output_dir = resolve(base, v); };
    t["run.dump_cleaned"] = [](RunConfig& c, auto k, auto v, auto&) { c.dump_cleaned = to_bool(k, v); };
    return t;
  }();
  return table;
}

}  // namespace

RunConfig::RunConfig() {
  for (std::size_t b = clean_prefix; b < k; ++b) inject_batches.push_back(b);
  tae.variant = drift::AutoencoderVariant::kAttention;
  tae.eta = 0.1;
}

std::vector<std::size_t> parse_batch_list(std::string_view text) {
  std::set<std::size_t> picked;
  text = trim(text);
  if (text.empty()) return {};
  for (auto part : split(text, ',')) {
    const auto dash = part.find('-');
    const auto first = to_u64("inject.batches", trim(part.substr(0, dash)));
    const auto last =
        dash == std::string_view::npos ? first : to_u64("inject.batches", trim(part.substr(dash + 1)));
    if (first < 1 || last < first) bad_value("inject.batches", part, "a 1-based batch range");
    for (auto b = first; b <= last; ++b) picked.insert(static_cast<std::size_t>(b - 1));
  }
  return {picked.begin(), picked.end()};
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig config;
  config.source_text = std::string(text);
  config.output_dir = base_dir / "cts-out";
  std::set<std::string, std::less<>> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_number) + ": expected 'key = value'");
    }
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
    if (!seen.insert(std::string(key)).second) {
      throw ConfigError("config key '" + std::string(key) + "' given twice");
    }
    it->second(config, key, value, base_dir);
  }
  // A changed k or clean prefix moves the default injection window with it.
  if (!seen.contains("inject.batches")) {
    config.inject_batches.clear();
    for (std::size_t b = config.clean_prefix; b < config.k; ++b) config.inject_batches.push_back(b);
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path().empty() ? "." : path.parent_path());
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(!input_path.empty(), "input.path is required");
  require(std::filesystem::is_regular_file(input_path),
          "input file '" + input_path.string() + "' does not exist");
  schema.validate();
  require(k >= 2, "batches.k must be at least 2");
  require(clean_prefix >= 1 && clean_prefix <= k, "batches.clean_prefix must lie in [1, k]");
  if (inject_enabled) {
    for (auto b : inject_batches) {
      require(b >= clean_prefix, "inject.batches must not touch the clean prefix (batch " +
                                     std::to_string(b + 1) + ")");
      require(b < k, "inject.batches lists batch " + std::to_string(b + 1) + " beyond k");
    }
    require(skew_subject.empty() || skew_factor >= 1.0, "inject.subject_factor must be >= 1");
    require(framing_rate >= 0.0 && framing_rate <= 1.0, "inject.framing_rate must lie in [0,1]");
    require(lexicon_path.empty() || std::filesystem::is_regular_file(lexicon_path),
            "lexicon file '" + lexicon_path.string() + "' does not exist");
    for (double r : label_drift) require(r >= 0.0 && r <= 1.0, "inject.label_drift rates must lie in [0,1]");
    require(label_drift.size() <= 1 || label_drift.size() == inject_batches.size(),
            "inject.label_drift needs one rate or one per injected batch");
  }
  require(features.dim >= 8, "features.dim must be at least 8");
  require(model.n_trees >= 1, "model.n_trees must be positive");
  require(model.depth >= 1 && model.depth <= 16, "model.depth must lie in [1, 16]");
  require(model.learning_rate > 0.0, "model.learning_rate must be positive");
  require(model.train_fraction > 0.0 && model.train_fraction < 1.0,
          "model.train_fraction must lie in (0,1)");
  require(model.l2 >= 0.0, "model.l2 must be non-negative");
  require(model.min_child_hessian >= 0.0, "model.min_child_hessian must be non-negative");
  require(model.validation_repeats >= 1, "model.validation_repeats must be at least 1");
  for (const auto* ae_config : {&ae, &tae}) {
    const std::string name = ae_config == &ae ? "ae" : "tae";
    require(ae_config->bottleneck_dim >= 1 && ae_config->bottleneck_dim < features.dim,
            name + ".bottleneck must lie in [1, features.dim)");
    require(ae_config->noise_sigma >= 0.0, name + ".noise_sigma must be non-negative");
    require(ae_config->dropout >= 0.0 && ae_config->dropout < 1.0, name + ".dropout must lie in [0,1)");
    require(ae_config->epochs >= 1, name + ".epochs must be positive");
    require(ae_config->step_size > 0.0, name + ".step_size must be positive");
    require(ae_config->batch_size >= 1, name + ".batch_size must be positive");
    require(ae_config->eta >= 0.0, name + ".eta must be non-negative");
    require(ae_config->chunk >= 1, name + ".chunk must be positive");
  }
  const auto& dw = drift_weights.values;
  require(std::all_of(dw.begin(), dw.end(), [](double w) { return w >= 0.0; }) &&
              dw[0] + dw[1] + dw[2] + dw[3] > 0.0,
          "drift.weights must be non-negative with a positive sum");
  try {
    trust_weights.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("trust weights: ") + e.what());
  }
  require(lambda > 0.0 && lambda <= 1.0, "trust.lambda must lie in (0,1]");
  require(alert_threshold >= 0.0 && alert_threshold <= 1.0, "trust.alert_threshold must lie in [0,1]");
  require(importance_repeats >= 1, "importance.repeats must be positive");
}

std::string config_template() {
  return R"(# cts run configuration. One `key = value` per line; '#' starts a comment.
# Relative paths resolve against the directory holding this file.

# --- input ---------------------------------------------------------------
input.path = synthetic.csv
input.format = csv              # csv | jsonl (UTF-8)

# Column names for each record role. id and protected may be left empty:
# rows are then numbered, and a seeded Bernoulli(0.5) protected attribute is
# synthesized per record.
schema.title = title
schema.subject = subject
schema.source = source
schema.date = date               # YYYY-MM-DD or "Month D, YYYY"
schema.label = label             # tokens: fake | true
schema.id = id
schema.protected =

# --- batching ------------------------------------------------------------
batches.k = 10                   # equal-size sequential batches
batches.clean_prefix = 5         # batches 1..clean_prefix are never injected

# --- bias injection --------------------------------------------------------
inject.enabled = true
inject.batches = 6-10            # 1-based; ranges and commas allowed
inject.subject = politics        # oversampled subject; empty disables
inject.subject_factor = 2
inject.framing_rate = 0.5        # per-occurrence swap probability
inject.lexicon =                 # empty = built-in 40-pair sentiment lexicon
inject.label_drift = 0.8         # target positive rate; one value or one per batch

# --- features ------------------------------------------------------------
features.dim = 256               # hashed bag-of-tokens width (>= 8)
features.hash_seed = 17

# --- reward model (gradient-boosted trees, logistic loss) ----------------
model.n_trees = 200
model.depth = 4
model.learning_rate = 0.1
model.early_stop_patience = 20
model.train_fraction = 0.8       # leading share of the clean prefix used to fit
model.l2 = 1
model.min_child_hessian = 1       # smallest hessian sum a leaf may hold
model.validation_repeats = 1     # >1 adds rolling-origin validation diagnostics

# --- denoising autoencoder -------------------------------------------------
ae.variant = plain
ae.bottleneck = 32
ae.noise_sigma = 0.05
ae.dropout = 0.1
ae.epochs = 200
ae.step_size = 0.01
ae.batch_size = 32
ae.eta = 0
ae.chunk = 16

# --- attention autoencoder -------------------------------------------------
tae.variant = attention
tae.bottleneck = 32
tae.noise_sigma = 0.05
tae.dropout = 0.1
tae.epochs = 200
tae.step_size = 0.01
tae.batch_size = 32
tae.eta = 0.1                    # reconstruction-variance penalty
tae.chunk = 16                   # token width of the attention sequence

# --- scoring ---------------------------------------------------------------
drift.weights = 0.25, 0.25, 0.25, 0.25   # psi, jsd, ae_delta, tae_loss
trust.alpha = 0.2                # drift
trust.beta = 0.2                 # uncertainty
trust.gamma = 0.2                # fairness violation rate
trust.delta = 0.2                # classification error
trust.zeta = 0.2                 # counterfactual consistency
trust.lambda = 0.5               # EMA coefficient
trust.alert_threshold = 0.7
importance.repeats = 5

# --- run -------------------------------------------------------------------
run.seed = 7
run.out = cts-out
run.dump_cleaned = false
)";
}

}  // namespace cts::pipeline
