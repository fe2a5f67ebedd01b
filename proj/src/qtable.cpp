#include "pgser/qtable.hpp"

#include <cstring>
#include <sstream>

#include "pgser/errors.hpp"
#include "pgser/util.hpp"

namespace pgser {

LearnerKind parse_learner_kind(const std::string& name) {
  if (name == "plain") return LearnerKind::plain;
  if (name == "dataset_constrained") return LearnerKind::dataset_constrained;
  throw ConfigError("train.kind: unknown learner kind \"" + name + "\"");
}

std::string to_string(LearnerKind kind) {
  return kind == LearnerKind::plain ? "plain" : "dataset_constrained";
}

QTable::QTable(int num_states, int num_goals, int num_actions, int h_max,
               LearnerKind kind)
    : num_states_(num_states),
      num_goals_(num_goals),
      num_actions_(num_actions),
      h_max_(h_max),
      kind_(kind) {
  if (num_states < 1 || num_goals < 1 || num_actions < 1 || h_max < 1)
    throw ConfigError("QTable: dimensions and h_max must be positive");
  values_ = Array::Constant(
      static_cast<Eigen::Index>(num_states) * num_goals, num_actions,
      -static_cast<double>(h_max));
}

ActionId QTable::greedy_action(StateId s, GoalId g) const {
  const auto r = values_.row(row(s, g));
  ActionId best = 0;
  for (ActionId a = 1; a < num_actions_; ++a)
    if (r(a) > r(best)) best = a;
  return best;
}

namespace {

constexpr char kMagic[4] = {'P', 'G', 'Q', 'T'};

struct Header {
  char magic[4];
  std::uint32_t version;
  std::int32_t num_states;
  std::int32_t num_goals;
  std::int32_t num_actions;
  std::int32_t h_max;
  std::uint8_t kind;
  std::uint8_t pad[3];
};
static_assert(sizeof(Header) == 28);

}  // namespace

void save_qtable(const QTable& q, const std::filesystem::path& path) {
  Header h{};
  std::memcpy(h.magic, kMagic, 4);
  h.version = 1;
  h.num_states = q.num_states();
  h.num_goals = q.num_goals();
  h.num_actions = q.num_actions();
  h.h_max = q.h_max();
  h.kind = q.kind() == LearnerKind::plain ? 0 : 1;
  std::string bytes(sizeof h, '\0');
  std::memcpy(bytes.data(), &h, sizeof h);
  const auto* values = reinterpret_cast<const char*>(q.values().data());
  bytes.append(values, q.values().size() * sizeof(double));
  write_file_atomic(path, bytes);
}

QTable load_qtable(const std::filesystem::path& path) {
  const std::string bytes = read_text_file(path);
  if (bytes.size() < sizeof(Header))
    throw ParseError("qtable " + path.string() + ": truncated header");
  Header h{};
  std::memcpy(&h, bytes.data(), sizeof h);
  if (std::memcmp(h.magic, kMagic, 4) != 0)
    throw ParseError("qtable " + path.string() + ": bad magic");
  if (h.version != 1)
    throw ParseError("qtable " + path.string() + ": unsupported version");
  if (h.num_states < 1 || h.num_goals < 1 || h.num_actions < 1 || h.h_max < 1 ||
      h.kind > 1)
    throw ParseError("qtable " + path.string() + ": bad header fields");
  const std::size_t count = static_cast<std::size_t>(h.num_states) *
                            h.num_goals * h.num_actions;
  if (bytes.size() != sizeof h + count * sizeof(double))
    throw ParseError("qtable " + path.string() + ": size mismatch");
  QTable q(h.num_states, h.num_goals, h.num_actions, h.h_max,
           h.kind == 0 ? LearnerKind::plain : LearnerKind::dataset_constrained);
  std::memcpy(q.values().data(), bytes.data() + sizeof h,
              count * sizeof(double));
  for (Eigen::Index i = 0; i < q.values().size(); ++i) {
    const double v = q.values().data()[i];
    if (!(v >= -static_cast<double>(h.h_max) && v <= 0.0))
      throw ParseError("qtable " + path.string() +
                       ": value outside [-h_max, 0]");
  }
  return q;
}

void export_qtable_csv(const QTable& q, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "s,g,a,q\n";
  for (StateId s = 0; s < q.num_states(); ++s)
    for (GoalId g = 0; g < q.num_goals(); ++g)
      for (ActionId a = 0; a < q.num_actions(); ++a)
        out << s << ',' << g << ',' << a << ',' << format_double(q.at(s, g, a))
            << '\n';
  write_file_atomic(path, out.str());
}

}  // namespace pgser
