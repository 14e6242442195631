#include <algorithm>
#include <cctype>

#include "drel/error.hpp"
#include "drel/ordinal.hpp"

namespace drel::ordinal {

namespace {

std::string strip(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out.push_back(c);
  }
  return out;
}

std::vector<std::string> split_top_level(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (depth < 0) throw Error("ordinal", "unbalanced parentheses in formula");
    if (c == '+' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (depth != 0) throw Error("ordinal", "unbalanced parentheses in formula");
  out.push_back(cur);
  return out;
}

// Columns for "kind", reference level single_turn.
Matrix kind_dummies(const Dataset& ds) {
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(ds.size()), 2);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto c = ds[i].context;
    if (c == ContextKind::WithinSpeakerCrossTurn) x(static_cast<Eigen::Index>(i), 0) = 1.0;
    if (c == ContextKind::CrossSpeaker) x(static_cast<Eigen::Index>(i), 1) = 1.0;
  }
  return x;
}

const std::vector<std::string> kKindNames = {"kind[within_speaker]", "kind[cross_speaker]"};

const GroupIndex& grouping(const Dataset& ds, const std::string& name) {
  if (name == "annotator") return ds.by_annotator();
  if (name == "du_pair") return ds.by_du_pair();
  if (name == "team") return ds.by_team();
  if (name == "conversation") return ds.by_conversation();
  throw Error("ordinal", "unknown grouping factor '" + name +
                             "' (expected annotator, du_pair, team or conversation)");
}

}  // namespace

OrdinalProblem problem_from_formula(const Dataset& ds, const std::string& formula, bool correlated) {
  const std::string f = strip(formula);
  const auto tilde = f.find('~');
  if (tilde == std::string::npos) throw Error("ordinal", "formula needs '~': " + formula);
  if (f.substr(0, tilde) != "confidence") {
    throw Error("ordinal", "formula response must be 'confidence'");
  }
  OrdinalProblem prob;
  prob.K = kMaxConfidence;
  prob.formula = formula;
  prob.y.reserve(ds.size());
  for (const auto& r : ds.records()) prob.y.push_back(r.confidence);
  prob.x.resize(static_cast<Eigen::Index>(ds.size()), 0);

  bool has_kind = false;
  for (const auto& term : split_top_level(f.substr(tilde + 1))) {
    if (term.empty()) throw Error("ordinal", "empty term in formula");
    if (term == "1" || term == "0") continue;
    if (term == "kind") {
      if (has_kind) throw Error("ordinal", "'kind' appears twice in formula");
      has_kind = true;
      prob.x = kind_dummies(ds);
      prob.fixed_names = kKindNames;
      continue;
    }
    if (term.front() == '(' && term.back() == ')') {
      const std::string inner = term.substr(1, term.size() - 2);
      const auto bar = inner.find('|');
      if (bar == std::string::npos) throw Error("ordinal", "random term lacks '|': " + term);
      const bool double_bar = inner.compare(bar, 2, "||") == 0;
      const std::string lhs = inner.substr(0, bar);
      const std::string group = inner.substr(bar + (double_bar ? 2 : 1));
      RandomTerm rt;
      rt.group = group;
      const auto& g = grouping(ds, group);
      rt.level = g.of_record;
      rt.n_levels = g.levels.size();
      rt.level_names = g.levels;
      if (lhs == "1") {
        rt.slopes.resize(static_cast<Eigen::Index>(ds.size()), 0);
      } else if (lhs == "kind" || lhs == "1+kind") {
        rt.slopes = kind_dummies(ds);
        rt.slope_names = kKindNames;
        rt.correlated = correlated && !double_bar;
      } else {
        throw Error("ordinal", "unsupported random-effect expression '" + lhs + "'");
      }
      for (const auto& other : prob.random) {
        if (other.group == group) throw Error("ordinal", "two random terms for '" + group + "'");
      }
      prob.random.push_back(std::move(rt));
      continue;
    }
    throw Error("ordinal", "unsupported formula term '" + term + "'");
  }
  return prob;
}

}  // namespace drel::ordinal
