#include "curio/model.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "curio/errors.hpp"

namespace curio {

using nlohmann::json;

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::markov: return "markov";
    case ModelKind::dictionary: return "dictionary";
    case ModelKind::constant: return "constant";
  }
  return "?";
}

std::string to_string(Conditioning c) {
  switch (c) {
    case Conditioning::none: return "none";
    case Conditioning::channel: return "channel";
    case Conditioning::transition: return "transition";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& s) {
  if (s == "markov") return ModelKind::markov;
  if (s == "dictionary") return ModelKind::dictionary;
  if (s == "constant") return ModelKind::constant;
  throw DomainError("unknown model kind '" + s + "'");
}

Conditioning parse_conditioning(const std::string& s) {
  if (s == "none") return Conditioning::none;
  if (s == "channel") return Conditioning::channel;
  if (s == "transition") return Conditioning::transition;
  throw DomainError("unknown conditioning '" + s + "'");
}

namespace detail {

class ModelImpl {
 public:
  ModelImpl(const ModelSpec& spec, std::uint32_t alphabet) : spec_(spec), alphabet_(alphabet) {}
  virtual ~ModelImpl() = default;
  virtual std::unique_ptr<ModelImpl> clone() const = 0;

  virtual double probability(ActionId next_action, Symbol symbol) const = 0;
  virtual void learn(const Step& step) = 0;
  virtual void advance(const Step& step) = 0;
  virtual void reset_context() = 0;
  virtual double description_length_bits() const = 0;
  virtual std::size_t parameter_count() const = 0;
  virtual json parameters_to_json() const = 0;
  virtual void parameters_from_json(const json& j) = 0;

  const ModelSpec& spec() const { return spec_; }
  std::uint32_t alphabet() const { return alphabet_; }

 protected:
  ModelSpec spec_;
  std::uint32_t alphabet_;
};

namespace {

// Slot for a per-action table; action 0 and "no conditioning" share slot 0.
std::size_t slot_of(Conditioning c, ActionId action) {
  return c == Conditioning::channel ? static_cast<std::size_t>(action) : 0;
}

class MarkovImpl final : public ModelImpl {
 public:
  MarkovImpl(const ModelSpec& spec, std::uint32_t alphabet) : ModelImpl(spec, alphabet) {
    if (!(spec.alpha > 0.0)) throw DomainError("markov smoothing alpha must be positive");
    // key = ((action_tag * (k + 1) + length) * A^k + digits) must fit in 64 bits
    const double key_bits = static_cast<double>(spec.order) * std::log2(alphabet) +
                            std::log2(spec.order + 1.0) + 24.0;
    if (key_bits > 63.0) throw DomainError("markov order too large for alphabet");
    pow_ = 1;
    for (unsigned i = 0; i < spec.order; ++i) pow_ *= alphabet;
    contexts_.resize(1);
  }

  std::unique_ptr<ModelImpl> clone() const override { return std::make_unique<MarkovImpl>(*this); }

  double probability(ActionId next_action, Symbol symbol) const override {
    const double a = spec_.alpha;
    const auto it = table_.find(key_for(next_action));
    if (it == table_.end()) return 1.0 / alphabet_;
    const Row& row = it->second;
    return (row.counts[symbol] + a) / (static_cast<double>(row.total) + alphabet_ * a);
  }

  void learn(const Step& step) override {
    Row& row = table_[key_for(step.action)];
    if (row.counts.empty()) row.counts.assign(alphabet_, 0);
    if (row.counts[step.observation]++ == 0) ++touched_;
    ++row.total;
  }

  void advance(const Step& step) override {
    if (spec_.order == 0) return;
    auto& ctx = context_for(step.action);
    if (ctx.size() == spec_.order) ctx.erase(ctx.begin());
    ctx.push_back(step.observation);
  }

  void reset_context() override {
    contexts_.clear();
    contexts_.resize(1);
  }

  double description_length_bits() const override {
    return spec_.order * std::log2(static_cast<double>(alphabet_)) +
           spec_.bits_per_parameter * static_cast<double>(touched_);
  }

  std::size_t parameter_count() const override { return touched_; }

  json parameters_to_json() const override {
    std::vector<std::uint64_t> keys;
    keys.reserve(table_.size());
    for (const auto& [k, _] : table_) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    json rows = json::array();
    for (auto k : keys) rows.push_back({{"key", k}, {"counts", table_.at(k).counts}});
    return {{"rows", rows}};
  }

  void parameters_from_json(const json& j) override {
    table_.clear();
    touched_ = 0;
    for (const auto& r : j.at("rows")) {
      Row row;
      row.counts = r.at("counts").get<std::vector<std::uint32_t>>();
      if (row.counts.size() != alphabet_) throw DomainError("markov row width mismatch");
      for (auto c : row.counts) {
        row.total += c;
        if (c > 0) ++touched_;
      }
      table_.emplace(r.at("key").get<std::uint64_t>(), std::move(row));
    }
  }

 private:
  struct Row {
    std::vector<std::uint32_t> counts;
    std::uint64_t total = 0;
  };

  std::vector<Symbol>& context_for(ActionId action) {
    const auto slot = slot_of(spec_.conditioning, action);
    if (slot >= contexts_.size()) contexts_.resize(slot + 1);
    return contexts_[slot];
  }

  std::uint64_t key_for(ActionId next_action) const {
    const auto slot = slot_of(spec_.conditioning, next_action);
    static const std::vector<Symbol> kEmpty;
    const auto& ctx = slot < contexts_.size() ? contexts_[slot] : kEmpty;
    std::uint64_t digits = 0;
    for (Symbol s : ctx) digits = digits * alphabet_ + s;
    std::uint64_t tag = 0;
    if (spec_.conditioning != Conditioning::none) tag = static_cast<std::uint64_t>(next_action) + 1;
    return (tag * (spec_.order + 1) + ctx.size()) * pow_ + digits;
  }

  std::uint64_t pow_ = 1;
  std::unordered_map<std::uint64_t, Row> table_;
  std::size_t touched_ = 0;
  std::vector<std::vector<Symbol>> contexts_;
};

// LZ78 incremental parse tree used as a predictor: the current node is the
// phrase parsed so far; its symbol counts give the next-symbol distribution.
class DictionaryImpl final : public ModelImpl {
 public:
  DictionaryImpl(const ModelSpec& spec, std::uint32_t alphabet) : ModelImpl(spec, alphabet) {
    if (!(spec.alpha > 0.0)) throw DomainError("dictionary smoothing alpha must be positive");
    if (spec.conditioning == Conditioning::transition) {
      throw DomainError("dictionary model supports only none/channel conditioning");
    }
  }

  std::unique_ptr<ModelImpl> clone() const override {
    return std::make_unique<DictionaryImpl>(*this);
  }

  double probability(ActionId next_action, Symbol symbol) const override {
    const auto slot = slot_of(spec_.conditioning, next_action);
    if (slot >= roots_.size() || roots_[slot] == kNone) return 1.0 / alphabet_;
    const Node& n = nodes_[cursor_node(slot)];
    const double a = spec_.alpha;
    return (n.counts[symbol] + a) / (static_cast<double>(n.total) + alphabet_ * a);
  }

  void learn(const Step& step) override {
    const auto slot = ensure_root(step.action);
    Cursor& cur = cursors_[slot];
    const std::uint32_t at = cur.node == kNone ? roots_[slot] : cur.node;
    cur.node = at;
    nodes_[at].counts[step.observation]++;
    nodes_[at].total++;
    if (nodes_[at].child[step.observation] == kNone) {
      const auto id = static_cast<std::uint32_t>(nodes_.size());
      nodes_.push_back(make_node());
      nodes_[at].child[step.observation] = id;
      ++phrases_;
      cur.pending_new = true;
    }
  }

  void advance(const Step& step) override {
    const auto slot = slot_of(spec_.conditioning, step.action);
    if (slot >= roots_.size() || roots_[slot] == kNone) return;
    Cursor& cur = cursors_[slot];
    const std::uint32_t at = cur.node == kNone ? roots_[slot] : cur.node;
    const std::uint32_t next = nodes_[at].child[step.observation];
    if (cur.pending_new || next == kNone) {
      cur.node = roots_[slot];  // phrase complete
    } else {
      cur.node = next;
    }
    cur.pending_new = false;
  }

  void reset_context() override {
    for (std::size_t i = 0; i < cursors_.size(); ++i) cursors_[i] = Cursor{roots_[i], false};
  }

  double description_length_bits() const override {
    return spec_.bits_per_parameter * static_cast<double>(phrases_);
  }

  std::size_t parameter_count() const override { return phrases_; }

  json parameters_to_json() const override {
    json nodes = json::array();
    for (const auto& n : nodes_) nodes.push_back({{"child", n.child}, {"counts", n.counts}});
    return {{"roots", roots_}, {"nodes", nodes}};
  }

  void parameters_from_json(const json& j) override {
    roots_ = j.at("roots").get<std::vector<std::uint32_t>>();
    nodes_.clear();
    for (const auto& jn : j.at("nodes")) {
      Node n;
      n.child = jn.at("child").get<std::vector<std::uint32_t>>();
      n.counts = jn.at("counts").get<std::vector<std::uint32_t>>();
      if (n.child.size() != alphabet_ || n.counts.size() != alphabet_) {
        throw DomainError("dictionary node width mismatch");
      }
      for (auto c : n.counts) n.total += c;
      nodes_.push_back(std::move(n));
    }
    std::size_t roots = 0;
    for (auto r : roots_) roots += r != kNone;
    phrases_ = nodes_.size() - roots;
    cursors_.assign(roots_.size(), Cursor{});
    reset_context();
  }

 private:
  static constexpr std::uint32_t kNone = 0xffffffffu;

  struct Node {
    std::vector<std::uint32_t> child;
    std::vector<std::uint32_t> counts;
    std::uint64_t total = 0;
  };
  struct Cursor {
    std::uint32_t node = kNone;
    bool pending_new = false;
  };

  Node make_node() const {
    Node n;
    n.child.assign(alphabet_, kNone);
    n.counts.assign(alphabet_, 0);
    return n;
  }

  std::uint32_t cursor_node(std::size_t slot) const {
    const auto node = slot < cursors_.size() ? cursors_[slot].node : kNone;
    return node == kNone ? roots_[slot] : node;
  }

  std::size_t ensure_root(ActionId action) {
    const auto slot = slot_of(spec_.conditioning, action);
    if (slot >= roots_.size()) {
      roots_.resize(slot + 1, kNone);
      cursors_.resize(slot + 1);
    }
    if (roots_[slot] == kNone) {
      roots_[slot] = static_cast<std::uint32_t>(nodes_.size());
      nodes_.push_back(make_node());
      cursors_[slot] = Cursor{roots_[slot], false};
    }
    return slot;
  }

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> roots_;
  std::vector<Cursor> cursors_;
  std::size_t phrases_ = 0;
};

class ConstantImpl final : public ModelImpl {
 public:
  ConstantImpl(const ModelSpec& spec, std::uint32_t alphabet) : ModelImpl(spec, alphabet) {
    if (spec.constant_symbol >= alphabet) throw DomainError("constant symbol outside alphabet");
    if (!(spec.epsilon > 0.0) || spec.epsilon * (alphabet - 1) >= 1.0) {
      throw DomainError("constant model epsilon out of range");
    }
  }
  std::unique_ptr<ModelImpl> clone() const override {
    return std::make_unique<ConstantImpl>(*this);
  }
  double probability(ActionId, Symbol symbol) const override {
    return symbol == spec_.constant_symbol ? 1.0 - spec_.epsilon * (alphabet_ - 1) : spec_.epsilon;
  }
  void learn(const Step&) override {}
  void advance(const Step&) override {}
  void reset_context() override {}
  double description_length_bits() const override { return spec_.constant_bits; }
  std::size_t parameter_count() const override { return 0; }
  json parameters_to_json() const override { return json::object(); }
  void parameters_from_json(const json&) override {}
};

std::unique_ptr<ModelImpl> make_impl(const ModelSpec& spec, std::uint32_t alphabet) {
  if (alphabet == 0) throw DomainError("alphabet size must be positive");
  switch (spec.kind) {
    case ModelKind::markov: return std::make_unique<MarkovImpl>(spec, alphabet);
    case ModelKind::dictionary: return std::make_unique<DictionaryImpl>(spec, alphabet);
    case ModelKind::constant: return std::make_unique<ConstantImpl>(spec, alphabet);
  }
  throw DomainError("unknown model kind");
}

constexpr int kModelFormatVersion = 1;

}  // namespace
}  // namespace detail

Model::Model(const ModelSpec& spec, std::uint32_t alphabet_size)
    : impl_(detail::make_impl(spec, alphabet_size)) {}
Model::Model(std::unique_ptr<detail::ModelImpl> impl) : impl_(std::move(impl)) {}
Model::~Model() = default;
Model::Model(const Model& other) : impl_(other.impl_->clone()), eval_ops_(other.eval_ops_) {}
Model& Model::operator=(const Model& other) {
  if (this != &other) {
    impl_ = other.impl_->clone();
    eval_ops_ = other.eval_ops_;
  }
  return *this;
}
Model::Model(Model&&) noexcept = default;
Model& Model::operator=(Model&&) noexcept = default;

ModelKind Model::kind() const { return impl_->spec().kind; }
const ModelSpec& Model::spec() const { return impl_->spec(); }
std::uint32_t Model::alphabet_size() const { return impl_->alphabet(); }

double Model::probability(ActionId next_action, Symbol symbol) const {
  if (symbol >= alphabet_size()) {
    throw DomainError("symbol " + std::to_string(symbol) + " outside model alphabet");
  }
  return impl_->probability(next_action, symbol);
}

Distribution Model::predict(ActionId next_action) const {
  Distribution d(alphabet_size());
  for (Symbol s = 0; s < d.size(); ++s) d[s] = impl_->probability(next_action, s);
  return d;
}

void Model::learn(const Step& step) {
  if (step.observation >= alphabet_size()) {
    throw DomainError("symbol " + std::to_string(step.observation) + " outside model alphabet");
  }
  impl_->learn(step);
}

void Model::advance(const Step& step) {
  if (step.observation >= alphabet_size()) {
    throw DomainError("symbol " + std::to_string(step.observation) + " outside model alphabet");
  }
  impl_->advance(step);
}

void Model::update(const Step& step) {
  learn(step);
  impl_->advance(step);
  ++eval_ops_;
}

void Model::reset_context() { impl_->reset_context(); }
double Model::description_length_bits() const { return impl_->description_length_bits(); }
std::size_t Model::parameter_count() const { return impl_->parameter_count(); }

void Model::save(std::ostream& sink) const {
  const ModelSpec& s = spec();
  json j = {{"format", "curio-model"},
            {"version", detail::kModelFormatVersion},
            {"alphabet_size", alphabet_size()},
            {"kind", to_string(s.kind)},
            {"order", s.order},
            {"alpha", s.alpha},
            {"conditioning", to_string(s.conditioning)},
            {"bits_per_parameter", s.bits_per_parameter},
            {"constant_symbol", s.constant_symbol},
            {"constant_bits", s.constant_bits},
            {"epsilon", s.epsilon},
            {"eval_ops", eval_ops_},
            {"parameters", impl_->parameters_to_json()}};
  sink << j.dump() << '\n';
}

Model Model::load(std::istream& source) {
  json j;
  try {
    j = json::parse(source);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("model snapshot: ") + e.what());
  }
  try {
    if (j.at("format") != "curio-model") throw ParseError(1, "not a model snapshot");
    const int version = j.at("version").get<int>();
    if (version != detail::kModelFormatVersion) {
      throw VersionError("model snapshot v" + std::to_string(version) + " unsupported");
    }
    ModelSpec s;
    s.kind = parse_model_kind(j.at("kind").get<std::string>());
    s.order = j.at("order").get<unsigned>();
    s.alpha = j.at("alpha").get<double>();
    s.conditioning = parse_conditioning(j.at("conditioning").get<std::string>());
    s.bits_per_parameter = j.at("bits_per_parameter").get<double>();
    s.constant_symbol = j.at("constant_symbol").get<Symbol>();
    s.constant_bits = j.at("constant_bits").get<double>();
    s.epsilon = j.at("epsilon").get<double>();
    auto impl = detail::make_impl(s, j.at("alphabet_size").get<std::uint32_t>());
    impl->parameters_from_json(j.at("parameters"));
    Model m(std::move(impl));
    m.eval_ops_ = j.at("eval_ops").get<std::uint64_t>();
    return m;
  } catch (const json::exception& e) {
    throw ParseError(1, std::string("model snapshot: ") + e.what());
  }
}

Distribution predict(const Model& model, std::span<const Step> context, ActionId next_action) {
  Model scratch = model;
  scratch.reset_context();
  for (const Step& s : context) scratch.advance(s);
  return scratch.predict(next_action);
}

CodeLengthReport code_length(const Model& model, std::span<const Step> steps) {
  CodeLengthReport r;
  r.model_bits = model.description_length_bits();
  if (!steps.empty()) {
    Model scratch = model;
    scratch.reset_context();
    for (const Step& s : steps) {
      const double bits = -std::log2(scratch.probability(s.action, s.observation));
      r.data_bits += bits;
      if (s.action >= r.data_bits_by_action.size()) r.data_bits_by_action.resize(s.action + 1, 0.0);
      r.data_bits_by_action[s.action] += bits;
      scratch.update(s);
      ++r.symbols_scored;
    }
    r.eval_ops = r.symbols_scored;
  }
  r.total_bits = r.model_bits + r.data_bits;
  return r;
}

double performance_l(const Model& model, std::span<const Step> steps) {
  return code_length(model, steps).total_bits;
}

double performance_ltau(const CodeLengthReport& report) {
  return report.total_bits + std::log2(static_cast<double>(std::max<std::uint64_t>(report.eval_ops, 1)));
}

double performance_ltau(const Model& model, std::span<const Step> steps) {
  return performance_ltau(code_length(model, steps));
}

}  // namespace curio
