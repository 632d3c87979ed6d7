#include "actrec/skeleton_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <regex>
#include <sstream>

#include "actrec/error.hpp"

namespace actrec {
namespace {

using nlohmann::json;

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  // drop trailing blank lines
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string_view::npos)
    lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_tokens(std::string_view line, std::string_view seps = " \t,") {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    i = line.find_first_not_of(seps, i);
    if (i == std::string_view::npos) break;
    auto j = line.find_first_of(seps, i);
    if (j == std::string_view::npos) j = line.size();
    tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

double to_real(std::string_view token, std::size_t line_no) {
  double value = 0.0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError("non-numeric token '" + std::string(token) + "'", line_no);
  return value;
}

int to_int(std::string_view token, std::size_t line_no) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size())
    throw ParseError("expected integer, got '" + std::string(token) + "'", line_no);
  return value;
}

void append_real(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out += buf;
}

// Reals are stored with 9 significant digits, which pins down a float exactly.
double stored_real(const json& v) {
  return static_cast<double>(static_cast<float>(v.get<double>()));
}

void append_json_string(std::string& out, const std::string& s) {
  out += json(s).dump();
}

Joint joint_from_xyz(double x, double y, double z) {
  Joint j;
  j.position = {x, y, z};
  j.is_missing = !(std::isfinite(x) && std::isfinite(y) && std::isfinite(z));
  if (j.is_missing) j.position.setZero();
  return j;
}

}  // namespace

void DatasetMeta::validate() const {
  if (category_count < 2) throw ConfigError("dataset must declare at least 2 categories");
  if (joint_count < 1) throw ConfigError("joint_count must be positive");
  for (int idx : {hip_joint_index, left_hip_index, right_hip_index})
    if (idx < 0 || idx >= joint_count) throw ConfigError("hip joint index out of range");
  if (!category_names.empty() && static_cast<int>(category_names.size()) != category_count)
    throw ConfigError("category_names size differs from category_count");
  if (!parent.empty()) {
    if (static_cast<int>(parent.size()) != joint_count)
      throw ConfigError("parent map size differs from joint_count");
    for (int j = 0; j < joint_count; ++j) {
      const int p = parent[static_cast<std::size_t>(j)];
      if (j == hip_joint_index ? p != -1 : (p < 0 || p >= joint_count))
        throw ConfigError("parent map must be a tree rooted at the hip joint");
    }
  }
}

DatasetFormat parse_format(std::string_view name) {
  if (name == "msr") return DatasetFormat::kMsr;
  if (name == "utkinect") return DatasetFormat::kUtkinect;
  if (name == "florence") return DatasetFormat::kFlorence;
  if (name == "canonical") return DatasetFormat::kCanonical;
  throw ConfigError("unknown dataset format '" + std::string(name) + "'");
}

// Native MSR-Action3D order: 1 l-shoulder, 2 r-shoulder, 3 neck, 4 spine, 5 l-hip, 6 r-hip,
// 7 hip center, 8/9 elbows, 10/11 wrists, 12/13 hands, 14/15 knees, 16/17 ankles,
// 18/19 feet, 20 head.
DatasetMeta msr_action3d_meta() {
  DatasetMeta m;
  m.joint_count = 20;
  m.category_count = 20;
  m.hip_joint_index = 6;
  m.left_hip_index = 4;
  m.right_hip_index = 5;
  m.parent = {2, 2, 3, 6, 6, 6, -1, 0, 1, 7, 8, 9, 10, 4, 5, 13, 14, 15, 16, 2};
  m.category_names = {"high arm wave", "horizontal arm wave", "hammer", "hand catch",
                      "forward punch", "high throw", "draw x", "draw tick",
                      "draw circle", "hand clap", "two hand wave", "side-boxing",
                      "bend", "forward kick", "side kick", "jogging",
                      "tennis swing", "tennis serve", "golf swing", "pick up & throw"};
  return m;
}

// Kinect SDK order: 0 hip center, 1 spine, 2 shoulder center, 3 head, 4-7 left arm,
// 8-11 right arm, 12-15 left leg, 16-19 right leg.
DatasetMeta utkinect_meta() {
  DatasetMeta m;
  m.joint_count = 20;
  m.category_count = 10;
  m.hip_joint_index = 0;
  m.left_hip_index = 12;
  m.right_hip_index = 16;
  m.parent = {-1, 0, 1, 2, 2, 4, 5, 6, 2, 8, 9, 10, 0, 12, 13, 14, 0, 16, 17, 18};
  m.category_names = {"walk", "sitDown", "standUp", "pickUp", "carry",
                      "throw", "push", "pull", "waveHands", "clapHands"};
  return m;
}

// OpenNI order: 0 head, 1 neck, 2 torso, 3-5 left arm, 6-8 right arm, 9-11 left leg,
// 12-14 right leg. No hip-center joint exists; the torso serves as root.
DatasetMeta florence3d_meta() {
  DatasetMeta m;
  m.joint_count = 15;
  m.category_count = 9;
  m.hip_joint_index = 2;
  m.left_hip_index = 9;
  m.right_hip_index = 12;
  m.parent = {1, 2, -1, 1, 3, 4, 1, 6, 7, 2, 9, 10, 2, 12, 13};
  m.category_names = {"wave", "drink from a bottle", "answer phone", "clap", "tight lace",
                      "sit down", "stand up", "read watch", "bow"};
  return m;
}

ActionSequence parse_msr_skeleton(std::string_view text, const DatasetMeta& meta) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw DataError("empty skeleton file");
  const auto joints = static_cast<std::size_t>(meta.joint_count);
  if (lines.size() % joints != 0)
    throw ParseError("row count " + std::to_string(lines.size()) + " is not a multiple of " +
                         std::to_string(joints),
                     lines.size());

  ActionSequence seq;
  seq.frames.reserve(lines.size() / joints);
  for (std::size_t row = 0; row < lines.size(); ++row) {
    const auto line_no = row + 1;
    const auto tokens = split_tokens(lines[row]);
    if (tokens.size() != 4) throw ParseError("expected 4 values per joint row", line_no);
    if (row % joints == 0) {
      seq.frames.emplace_back();
      seq.frames.back().timestamp_index = row / joints;
      seq.frames.back().joints.reserve(joints);
    }
    Joint j;
    j.position = {to_real(tokens[0], line_no), to_real(tokens[1], line_no),
                  to_real(tokens[2], line_no)};
    const double conf = to_real(tokens[3], line_no);
    j.confidence = std::clamp(conf, 0.0, 1.0);
    j.is_missing = conf == 0.0 || !j.position.allFinite();
    if (!j.position.allFinite()) j.position.setZero();
    seq.frames.back().joints.push_back(j);
  }
  return seq;
}

MsrName parse_msr_filename(const std::string& filename) {
  static const std::regex pattern(R"(a(\d{2})_s(\d{2})_(e\d{2})_skeleton3D\.txt)");
  std::smatch m;
  if (!std::regex_match(filename, m, pattern))
    throw DataError("unrecognized MSR file name: " + filename);
  return {std::stoi(m[1].str()), std::stoi(m[2].str()), m[3].str()};
}

Dataset parse_utkinect(std::string_view joints_text, std::string_view labels_text,
                       const std::string& recording_id, const DatasetMeta& meta) {
  static const std::regex rec_pattern(R"(s(\d{2})_e(\d{2}))");
  std::smatch rec;
  if (!std::regex_match(recording_id, rec, rec_pattern))
    throw DataError("unrecognized UTKinect recording id: " + recording_id);
  const int subject = std::stoi(rec[1].str());

  // Frame table keyed by the recorded frame id.
  std::map<int, SkeletonFrame> frames;
  const auto joint_lines = split_lines(joints_text);
  const auto expected = 1 + 3 * static_cast<std::size_t>(meta.joint_count);
  for (std::size_t row = 0; row < joint_lines.size(); ++row) {
    const auto tokens = split_tokens(joint_lines[row]);
    if (tokens.empty()) continue;
    if (tokens.size() != expected)
      throw ParseError("expected " + std::to_string(expected) + " values per frame row", row + 1);
    SkeletonFrame frame;
    const int id = to_int(tokens[0], row + 1);
    frame.timestamp_index = static_cast<std::size_t>(id);
    for (int j = 0; j < meta.joint_count; ++j) {
      const auto base = 1 + 3 * static_cast<std::size_t>(j);
      frame.joints.push_back(joint_from_xyz(to_real(tokens[base], row + 1),
                                            to_real(tokens[base + 1], row + 1),
                                            to_real(tokens[base + 2], row + 1)));
    }
    frames[id] = std::move(frame);
  }

  Dataset out;
  const auto label_lines = split_lines(labels_text);
  bool in_block = false;
  for (std::size_t row = 0; row < label_lines.size(); ++row) {
    const auto tokens = split_tokens(label_lines[row], " \t:");
    if (tokens.empty()) continue;
    if (tokens.size() == 1) {
      in_block = tokens[0] == recording_id;
      continue;
    }
    if (!in_block) continue;
    if (tokens.size() != 3) throw ParseError("expected 'action: start end'", row + 1);
    const auto& names = meta.category_names;
    auto it = std::find(names.begin(), names.end(), std::string(tokens[0]));
    if (it == names.end())
      throw ParseError("unknown UTKinect action '" + std::string(tokens[0]) + "'", row + 1);
    if (tokens[1] == "NaN" || tokens[2] == "NaN") continue;  // unannotated segment
    const int start = to_int(tokens[1], row + 1);
    const int end = to_int(tokens[2], row + 1);
    ActionSequence seq;
    seq.label = static_cast<int>(it - names.begin()) + 1;
    seq.subject_id = subject;
    seq.instance_id = recording_id + "_" + std::string(tokens[0]);
    for (auto f = frames.lower_bound(start); f != frames.end() && f->first <= end; ++f)
      seq.frames.push_back(f->second);
    if (seq.frames.empty())
      throw DataError("UTKinect segment " + seq.instance_id + " has no frames");
    out.push_back(std::move(seq));
  }
  return out;
}

Dataset parse_florence(std::string_view text, const DatasetMeta& meta) {
  const auto lines = split_lines(text);
  const auto expected = 3 + 3 * static_cast<std::size_t>(meta.joint_count);
  Dataset out;
  int current_video = -1;
  for (std::size_t row = 0; row < lines.size(); ++row) {
    const auto tokens = split_tokens(lines[row]);
    if (tokens.empty()) continue;
    if (tokens.size() != expected)
      throw ParseError("expected " + std::to_string(expected) + " values per row", row + 1);
    const int video = to_int(tokens[0], row + 1);
    const int actor = to_int(tokens[1], row + 1);
    const int category = to_int(tokens[2], row + 1);
    if (category < 1 || category > meta.category_count)
      throw ParseError("category out of range", row + 1);
    if (video != current_video) {
      ActionSequence seq;
      seq.label = category;
      seq.subject_id = actor;
      seq.instance_id = "v" + std::to_string(video);
      out.push_back(std::move(seq));
      current_video = video;
    }
    SkeletonFrame frame;
    frame.timestamp_index = out.back().frames.size();
    for (int j = 0; j < meta.joint_count; ++j) {
      const auto base = 3 + 3 * static_cast<std::size_t>(j);
      frame.joints.push_back(joint_from_xyz(to_real(tokens[base], row + 1),
                                            to_real(tokens[base + 1], row + 1),
                                            to_real(tokens[base + 2], row + 1)));
    }
    out.back().frames.push_back(std::move(frame));
  }
  return out;
}

void write_canonical(std::ostream& out, const Dataset& dataset, const DatasetMeta& meta) {
  std::string line;
  for (const auto& seq : dataset) {
    line.clear();
    line += "{\"label\":";
    line += seq.label ? std::to_string(*seq.label) : "null";
    line += ",\"subject\":" + std::to_string(seq.subject_id);
    line += ",\"instance\":";
    append_json_string(line, seq.instance_id);
    line += ",\"joint_count\":" + std::to_string(meta.joint_count);
    line += ",\"frames\":[";
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
      const auto& frame = seq.frames[f];
      if (static_cast<int>(frame.joints.size()) != meta.joint_count)
        throw DataError("sequence " + seq.instance_id + " frame " + std::to_string(f) +
                        " has " + std::to_string(frame.joints.size()) + " joints, expected " +
                        std::to_string(meta.joint_count));
      if (f) line += ',';
      line += '[';
      for (std::size_t j = 0; j < frame.joints.size(); ++j) {
        const auto& joint = frame.joints[j];
        if (j) line += ',';
        line += '[';
        append_real(line, joint.position.x());
        line += ',';
        append_real(line, joint.position.y());
        line += ',';
        append_real(line, joint.position.z());
        line += ',';
        if (joint.confidence)
          append_real(line, *joint.confidence);
        else
          line += "null";
        line += joint.is_missing ? ",true]" : ",false]";
      }
      line += ']';
    }
    line += "]}\n";
    out << line;
  }
}

std::string write_canonical(const Dataset& dataset, const DatasetMeta& meta) {
  std::ostringstream out;
  write_canonical(out, dataset, meta);
  return out.str();
}

Dataset parse_canonical(std::string_view text, const DatasetMeta& meta) {
  Dataset out;
  const auto lines = split_lines(text);
  for (std::size_t row = 0; row < lines.size(); ++row) {
    const auto line_no = row + 1;
    if (lines[row].find_first_not_of(" \t") == std::string_view::npos) continue;
    json doc;
    try {
      doc = json::parse(lines[row]);
    } catch (const json::exception& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    try {
      ActionSequence seq;
      if (!doc.at("label").is_null()) seq.label = doc.at("label").get<int>();
      seq.subject_id = doc.at("subject").get<int>();
      seq.instance_id = doc.at("instance").get<std::string>();
      const int joints = doc.at("joint_count").get<int>();
      if (joints != meta.joint_count)
        throw ParseError("joint_count " + std::to_string(joints) + " differs from dataset's " +
                             std::to_string(meta.joint_count),
                         line_no);
      std::size_t index = 0;
      for (const auto& jf : doc.at("frames")) {
        if (static_cast<int>(jf.size()) != joints)
          throw ParseError("frame " + std::to_string(index) + " has wrong joint count", line_no);
        SkeletonFrame frame;
        frame.timestamp_index = index++;
        frame.joints.reserve(jf.size());
        for (const auto& jj : jf) {
          if (jj.size() != 5) throw ParseError("joint entries must have 5 fields", line_no);
          Joint joint;
          joint.position = {stored_real(jj[0]), stored_real(jj[1]), stored_real(jj[2])};
          if (!jj[3].is_null()) joint.confidence = stored_real(jj[3]);
          joint.is_missing = jj[4].get<bool>();
          frame.joints.push_back(joint);
        }
        seq.frames.push_back(std::move(frame));
      }
      out.push_back(std::move(seq));
    } catch (const json::exception& e) {
      throw ParseError(std::string("schema violation: ") + e.what(), line_no);
    }
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset parse_dataset(DatasetFormat format, const std::vector<std::filesystem::path>& paths,
                      const DatasetMeta& meta) {
  Dataset out;
  for (const auto& path : paths) {
    const auto text = read_file(path);
    switch (format) {
      case DatasetFormat::kMsr: {
        MsrName name;
        try {
          name = parse_msr_filename(path.filename().string());
        } catch (const DataError&) {
          throw DataError("cannot decode label/subject from " + path.string());
        }
        if (name.action < 1 || name.action > meta.category_count)
          throw DataError("label out of range in " + path.string());
        auto seq = parse_msr_skeleton(text, meta);
        seq.label = name.action;
        seq.subject_id = name.subject;
        seq.instance_id = name.instance;
        out.push_back(std::move(seq));
        break;
      }
      case DatasetFormat::kUtkinect: {
        static const std::regex pattern(R"(joints_(s\d{2}_e\d{2})\.txt)");
        std::smatch m;
        const auto filename = path.filename().string();
        if (!std::regex_match(filename, m, pattern))
          throw DataError("cannot decode subject from " + path.string());
        const auto labels = read_file(path.parent_path() / "actionLabel.txt");
        auto part = parse_utkinect(text, labels, m[1].str(), meta);
        std::move(part.begin(), part.end(), std::back_inserter(out));
        break;
      }
      case DatasetFormat::kFlorence: {
        auto part = parse_florence(text, meta);
        std::move(part.begin(), part.end(), std::back_inserter(out));
        break;
      }
      case DatasetFormat::kCanonical: {
        auto part = parse_canonical(text, meta);
        std::move(part.begin(), part.end(), std::back_inserter(out));
        break;
      }
    }
  }
  return out;
}

}  // namespace actrec
