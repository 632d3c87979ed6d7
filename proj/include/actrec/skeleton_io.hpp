#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "actrec/types.hpp"

namespace actrec {

enum class DatasetFormat { kMsr, kUtkinect, kFlorence, kCanonical };

DatasetFormat parse_format(std::string_view name);

/// Joint layouts in each dataset's native order.
DatasetMeta msr_action3d_meta();
DatasetMeta utkinect_meta();
DatasetMeta florence3d_meta();

/// One MSR-Action3D skeleton3D file: rows of "x y z confidence", joint_count rows per frame.
/// Joints with zero confidence are flagged missing; coordinates are kept.
ActionSequence parse_msr_skeleton(std::string_view text, const DatasetMeta& meta);

struct MsrName {
  int action = 0;
  int subject = 0;
  std::string instance;
};

/// Decodes "aXX_sYY_eZZ_skeleton3D.txt"; throws DataError on any other shape.
MsrName parse_msr_filename(const std::string& filename);

/// UTKinect joints_sXX_eYY.txt: each row is "frame_id x1 y1 z1 ... x20 y20 z20".
/// Segments come from actionLabel.txt ("sXX_eYY" header followed by "name: start end" rows).
Dataset parse_utkinect(std::string_view joints_text, std::string_view labels_text,
                       const std::string& recording_id, const DatasetMeta& meta);

/// Florence3D single CSV/whitespace file: "video actor category x1 y1 z1 ... x15 y15 z15" per frame.
Dataset parse_florence(std::string_view text, const DatasetMeta& meta);

/// Canonical line-delimited JSON; one sequence per line.
Dataset parse_canonical(std::string_view text, const DatasetMeta& meta);
void write_canonical(std::ostream& out, const Dataset& dataset, const DatasetMeta& meta);
std::string write_canonical(const Dataset& dataset, const DatasetMeta& meta);

/// Reads every path with the given layout. For utkinect, `paths` holds joints files and
/// an "actionLabel.txt" found alongside them.
Dataset parse_dataset(DatasetFormat format, const std::vector<std::filesystem::path>& paths,
                      const DatasetMeta& meta);

std::string read_file(const std::filesystem::path& path);

}  // namespace actrec
