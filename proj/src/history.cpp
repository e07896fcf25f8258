#include "curio/history.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "curio/errors.hpp"
#include "curio/textio.hpp"

namespace curio {

namespace {

constexpr std::string_view kMagic = "curio-history";

template <typename T>
T parse_field(std::string_view field, std::size_t line, const char* name) {
  T value{};
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ParseError(line, std::string("bad ") + name + " field '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

History::History(std::uint32_t alphabet_size) : alphabet_size_(alphabet_size) {
  if (alphabet_size == 0) throw DomainError("alphabet size must be positive");
}

Timestep History::append(Symbol observation, ActionId action, double reward_ext,
                         double reward_int) {
  if (observation >= alphabet_size_) {
    throw DomainError("observation symbol " + std::to_string(observation) +
                      " outside alphabet of size " + std::to_string(alphabet_size_));
  }
  const Timestep t = steps_.size() + 1;
  steps_.push_back(Step{t, observation, action, reward_ext, reward_int});
  return t;
}

HistorySlice History::slice(Timestep start, Timestep end) const {
  if (start < 1 || end > length() || end + 1 < start) {
    throw RangeError("slice [" + std::to_string(start) + ", " + std::to_string(end) +
                     "] outside history of length " + std::to_string(length()));
  }
  HistorySlice out{start, end, {}};
  out.steps.assign(steps_.begin() + static_cast<std::ptrdiff_t>(start - 1),
                   steps_.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

const Step& History::at(Timestep t) const {
  if (t < 1 || t > length()) throw RangeError("timestep " + std::to_string(t) + " out of range");
  return steps_[t - 1];
}

void History::save(std::ostream& sink) const {
  sink << kMagic << " v" << kFormatVersion << " alphabet=" << alphabet_size_ << '\n';
  std::string line;
  for (const Step& s : steps_) {
    line.clear();
    line += std::to_string(s.t);
    line += ',';
    line += std::to_string(s.observation);
    line += ',';
    line += std::to_string(s.action);
    line += ',';
    line += format_double(s.reward_ext);
    line += ',';
    line += format_double(s.reward_int);
    line += '\n';
    sink << line;
  }
  if (!sink) throw std::runtime_error("history: write failed");
}

History History::load(std::istream& source) {
  std::string line;
  if (!std::getline(source, line)) throw ParseError(1, "missing header");
  std::string_view header = line;
  if (header.substr(0, kMagic.size()) != kMagic) throw ParseError(1, "not a history file");
  header.remove_prefix(kMagic.size());
  if (header.substr(0, 2) != " v") throw ParseError(1, "missing format version");
  header.remove_prefix(2);
  const auto space = header.find(' ');
  if (space == std::string_view::npos) throw ParseError(1, "malformed header");
  const int version = parse_field<int>(header.substr(0, space), 1, "version");
  if (version != kFormatVersion) {
    throw VersionError("history format v" + std::to_string(version) + " unsupported (expected v" +
                       std::to_string(kFormatVersion) + ")");
  }
  header.remove_prefix(space + 1);
  constexpr std::string_view kAlpha = "alphabet=";
  if (header.substr(0, kAlpha.size()) != kAlpha) throw ParseError(1, "missing alphabet size");
  const auto alphabet = parse_field<std::uint32_t>(header.substr(kAlpha.size()), 1, "alphabet");
  if (alphabet == 0) throw ParseError(1, "alphabet size must be positive");

  History h(alphabet);
  std::size_t lineno = 1;
  while (std::getline(source, line)) {
    ++lineno;
    const auto fields = split_csv_line(line);
    if (fields.size() != 5) {
      throw ParseError(lineno, "expected 5 fields, found " + std::to_string(fields.size()));
    }
    const auto t = parse_field<Timestep>(fields[0], lineno, "t");
    const auto obs = parse_field<Symbol>(fields[1], lineno, "observation");
    const auto act = parse_field<ActionId>(fields[2], lineno, "action");
    const auto rext = parse_field<double>(fields[3], lineno, "reward_ext");
    const auto rint = parse_field<double>(fields[4], lineno, "reward_int");
    if (t != h.length() + 1) {
      throw ParseError(lineno, "non-contiguous timestep " + std::to_string(t));
    }
    if (obs >= alphabet) throw ParseError(lineno, "observation outside alphabet");
    h.append(obs, act, rext, rint);
  }
  return h;
}

}  // namespace curio
