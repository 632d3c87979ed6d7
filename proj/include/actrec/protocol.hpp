#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "actrec/types.hpp"

namespace actrec {

enum class ProtocolKind { kCrossSubject, kHalfSubjects, kLeaveOneSubjectOut };

ProtocolKind parse_protocol_kind(std::string_view name);
std::string_view to_string(ProtocolKind kind);

struct ClassSubset {
  std::string name;
  std::vector<int> classes;  // dataset labels, 1-based
};

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::kLeaveOneSubjectOut;
  std::vector<int> train_subjects;   // cross_subject only
  std::vector<ClassSubset> subsets;  // e.g. AS1/AS2/AS3; empty = all classes at once
  std::uint64_t seed = 0;            // half_subjects draw
};

struct Fold {
  std::string name;
  std::vector<std::size_t> train;  // indices into the dataset
  std::vector<std::size_t> test;
};

/// Splits by subject id. cross_subject: one fold with the listed training subjects;
/// half_subjects: one seeded fold with ceil(#subjects / 2) training subjects;
/// leave_one_subject_out: one fold per subject, in ascending subject order.
std::vector<Fold> split_protocol(const Dataset& dataset, const ProtocolSpec& spec);

/// Distinct subject ids in ascending order.
std::vector<int> subject_ids(const Dataset& dataset);

}  // namespace actrec
