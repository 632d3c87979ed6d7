#include "actrec/protocol.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "actrec/error.hpp"

namespace actrec {

ProtocolKind parse_protocol_kind(std::string_view name) {
  if (name == "cross_subject") return ProtocolKind::kCrossSubject;
  if (name == "half_subjects") return ProtocolKind::kHalfSubjects;
  if (name == "leave_one_subject_out") return ProtocolKind::kLeaveOneSubjectOut;
  throw ConfigError("unknown protocol '" + std::string(name) + "'");
}

std::string_view to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::kCrossSubject: return "cross_subject";
    case ProtocolKind::kHalfSubjects: return "half_subjects";
    case ProtocolKind::kLeaveOneSubjectOut: return "leave_one_subject_out";
  }
  return "cross_subject";
}

std::vector<int> subject_ids(const Dataset& dataset) {
  std::set<int> ids;
  for (const auto& s : dataset) ids.insert(s.subject_id);
  return {ids.begin(), ids.end()};
}

namespace {

Fold fold_for(const Dataset& dataset, const std::set<int>& train_subjects, std::string name) {
  Fold fold;
  fold.name = std::move(name);
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (train_subjects.count(dataset[i].subject_id) ? fold.train : fold.test).push_back(i);
  return fold;
}

}  // namespace

std::vector<Fold> split_protocol(const Dataset& dataset, const ProtocolSpec& spec) {
  const auto subjects = subject_ids(dataset);
  std::vector<Fold> folds;
  switch (spec.kind) {
    case ProtocolKind::kCrossSubject: {
      if (spec.train_subjects.empty()) throw ConfigError("cross_subject needs train_subjects");
      std::set<int> train(spec.train_subjects.begin(), spec.train_subjects.end());
      for (int s : train)
        if (!std::binary_search(subjects.begin(), subjects.end(), s))
          throw ConfigError("train subject " + std::to_string(s) + " not present in dataset");
      folds.push_back(fold_for(dataset, train, "cross_subject"));
      break;
    }
    case ProtocolKind::kHalfSubjects: {
      auto shuffled = subjects;
      std::mt19937_64 rng(spec.seed);
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      const auto half = (shuffled.size() + 1) / 2;
      std::set<int> train(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(half));
      folds.push_back(fold_for(dataset, train, "half_subjects"));
      break;
    }
    case ProtocolKind::kLeaveOneSubjectOut: {
      for (int held_out : subjects) {
        std::set<int> train(subjects.begin(), subjects.end());
        train.erase(held_out);
        folds.push_back(fold_for(dataset, train, "subject_" + std::to_string(held_out)));
      }
      break;
    }
  }
  return folds;
}

}  // namespace actrec
