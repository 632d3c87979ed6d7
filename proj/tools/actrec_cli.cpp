// actrec: command-line front end for ingestion, synthetic data, training, evaluation,
// restoration and report rendering. Every command writes under --out and closes with
// manifest.json listing what it produced.

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "actrec/config.hpp"
#include "actrec/error.hpp"
#include "actrec/model_io.hpp"
#include "actrec/pipeline.hpp"
#include "actrec/report.hpp"
#include "actrec/restoration.hpp"
#include "actrec/skeleton_io.hpp"
#include "actrec/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace actrec;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string registration;
  std::string variant;
  std::string out;
  std::string format;
  std::string meta;
  std::vector<std::string> inputs;
  std::string artifacts;
  std::string report_format = "json";
  std::vector<std::string> argv;
};

// Collects every file a command writes so the manifest can list it.
class OutputDir {
 public:
  OutputDir(const std::string& root, std::string command) : root_(root), command_(std::move(command)) {
    if (root_.empty()) throw ConfigError("--out is required");
    fs::create_directories(root_);
  }

  const fs::path& root() const { return root_; }

  void write(const std::string& relative, const std::string& content, const std::string& kind) {
    const fs::path path = root_ / relative;
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) throw DataError("cannot write " + path.string());
    files_.push_back({{"path", relative}, {"kind", kind}, {"bytes", content.size()}});
  }

  void write_json(const std::string& relative, const json& doc, const std::string& kind) {
    write(relative, doc.dump(2) + "\n", kind);
  }

  void finish(const Options& opts, json extra = json::object()) {
    json manifest = {{"tool", "actrec"},
                     {"manifest_version", 1},
                     {"command", command_},
                     {"argv", opts.argv},
                     {"files", files_}};
    for (auto& [key, value] : extra.items()) manifest[key] = value;
    std::ofstream out(root_ / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
    if (!out) throw DataError("cannot write manifest");
  }

 private:
  fs::path root_;
  std::string command_;
  json files_ = json::array();
};

json parse_json_file(const fs::path& path, bool is_config) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    if (is_config) throw ConfigError(e.what());
    throw;
  }
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    const std::string msg = path.string() + " is not valid JSON: " + e.what();
    if (is_config) throw ConfigError(msg);
    throw DataError(msg);
  }
}

struct ConfigDoc {
  json doc = json::object();
  fs::path base = fs::current_path();  // relative paths resolve against the config's folder
};

ConfigDoc load_config_doc(const std::string& path) {
  ConfigDoc c;
  if (path.empty()) return c;
  c.doc = parse_json_file(path, true);
  if (!c.doc.is_object()) throw ConfigError("config must be a JSON object");
  c.base = fs::absolute(path).parent_path();
  return c;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

template <typename Fn>
auto config_section(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed '") + name + "' section: " + e.what());
  }
}

void reject_unknown(const json& section, const char* name, const std::set<std::string>& known) {
  if (!section.is_object()) throw ConfigError(std::string("'") + name + "' must be an object");
  for (const auto& [key, value] : section.items())
    if (!known.count(key)) throw ConfigError(std::string("unknown key '") + key + "' in '" + name + "'");
}

std::optional<DatasetMeta> builtin_meta(const std::string& name) {
  if (name == "msr") return msr_action3d_meta();
  if (name == "utkinect") return utkinect_meta();
  if (name == "florence") return florence3d_meta();
  return std::nullopt;
}

// Directory inputs expand to the files each raw layout names, in sorted order.
bool accepts_file(DatasetFormat format, const std::string& name) {
  switch (format) {
    case DatasetFormat::kMsr: return name.ends_with("skeleton3D.txt");
    case DatasetFormat::kUtkinect: return name.starts_with("joints_") && name.ends_with(".txt");
    case DatasetFormat::kFlorence: return name.ends_with(".txt") || name.ends_with(".csv");
    case DatasetFormat::kCanonical: return name.ends_with(".jsonl");
  }
  return false;
}

std::vector<fs::path> expand_inputs(DatasetFormat format, const std::vector<fs::path>& inputs) {
  std::vector<fs::path> files;
  for (const auto& input : inputs) {
    if (fs::is_directory(input)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::recursive_directory_iterator(input))
        if (entry.is_regular_file() && accepts_file(format, entry.path().filename().string()))
          found.push_back(entry.path());
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(input)) {
      files.push_back(input);
    } else {
      throw DataError("input " + input.string() + " does not exist");
    }
  }
  return files;
}

struct DataSource {
  Dataset data;
  DatasetMeta meta;
  json section;  // resolved description, reusable as a config section
  std::string kind;
};

DataSource load_dataset_section(const json& d, const fs::path& base) {
  reject_unknown(d, "dataset", {"format", "paths", "meta"});
  DataSource src;
  src.kind = "dataset";
  const auto format_name = config_section("dataset", [&] { return d.at("format").get<std::string>(); });
  const auto format = parse_format(format_name);
  const auto paths = config_section("dataset", [&] { return d.at("paths").get<std::vector<std::string>>(); });
  if (paths.empty()) throw ConfigError("dataset.paths is empty");

  json meta_ref;
  if (d.contains("meta")) {
    const auto ref = config_section("dataset", [&] { return d.at("meta").get<std::string>(); });
    if (auto m = builtin_meta(ref)) {
      src.meta = *m;
      meta_ref = ref;
    } else {
      const auto path = resolve(base, ref);
      src.meta = dataset_meta_from_json(parse_json_file(path, true));
      meta_ref = path.string();
    }
  } else if (auto m = builtin_meta(format_name)) {
    src.meta = *m;
    meta_ref = format_name;
  } else {
    throw ConfigError("dataset.meta is required for the canonical format");
  }

  std::vector<fs::path> inputs;
  json resolved = json::array();
  for (const auto& p : paths) {
    inputs.push_back(resolve(base, p));
    resolved.push_back(inputs.back().string());
  }
  const auto files = expand_inputs(format, inputs);
  if (files.empty()) throw DataError("no input files matched the dataset paths");
  src.data = parse_dataset(format, files, src.meta);
  if (src.data.empty()) throw DataError("dataset holds no sequences");
  src.meta.sequence_count = static_cast<int>(src.data.size());
  src.section = {{"format", format_name}, {"paths", resolved}, {"meta", meta_ref}};
  return src;
}

DataSource load_synthetic(const SyntheticSpec& spec) {
  DataSource src;
  src.kind = "synthetic";
  auto [data, meta] = generate_synthetic(spec);
  src.data = std::move(data);
  src.meta = std::move(meta);
  src.section = to_json(spec);
  return src;
}

DataSource load_data(const ConfigDoc& c) {
  if (c.doc.contains("dataset")) return load_dataset_section(c.doc.at("dataset"), c.base);
  if (c.doc.contains("synthetic")) return load_synthetic(synthetic_spec_from_json(c.doc.at("synthetic")));
  throw ConfigError("config needs a 'dataset' or 'synthetic' section");
}

json with_source(json doc, const DataSource& src) {
  doc[src.kind] = src.section;
  return doc;
}

std::string fold_file_name(std::size_t index, const std::string& name) {
  std::string safe = name;
  for (auto& ch : safe)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
  std::ostringstream out;
  out << "folds/fold_" << (index < 10 ? "0" : "") << index << "_" << safe << ".json";
  return out.str();
}

// Layout-independent summary printed by the data commands.
json dataset_summary(const Dataset& data, const DatasetMeta& meta) {
  std::set<int> labels;
  std::size_t frames = 0;
  for (const auto& s : data) {
    if (s.label) labels.insert(*s.label);
    frames += s.frames.size();
  }
  return {{"sequences", data.size()},
          {"frames", frames},
          {"labels_present", labels.size()},
          {"subjects", subject_ids(data)},
          {"joint_count", meta.joint_count}};
}

void write_source(OutputDir& out, const Dataset& data, const DatasetMeta& meta) {
  out.write("dataset.jsonl", write_canonical(data, meta), "dataset");
  out.write_json("meta.json", to_json(meta), "meta");
  out.write_json("source.json",
                 {{"dataset", {{"format", "canonical"}, {"paths", {"dataset.jsonl"}}, {"meta", "meta.json"}}}},
                 "config-fragment");
}

int cmd_convert(const Options& opts) {
  DataSource src;
  if (!opts.inputs.empty()) {
    if (opts.format.empty()) throw ConfigError("convert needs --format with input files");
    json section = {{"format", opts.format}, {"paths", opts.inputs}};
    if (!opts.meta.empty()) section["meta"] = opts.meta;
    src = load_dataset_section(section, fs::current_path());
  } else {
    const auto c = load_config_doc(opts.config);
    if (!c.doc.contains("dataset")) throw ConfigError("convert needs input files or a 'dataset' section");
    src = load_dataset_section(c.doc.at("dataset"), c.base);
  }
  OutputDir out(opts.out, "convert");
  write_source(out, src.data, src.meta);
  const auto summary = dataset_summary(src.data, src.meta);
  out.finish(opts, {{"source", src.section}, {"summary", summary}});
  std::cout << "converted " << src.data.size() << " sequences\n";
  return 0;
}

int cmd_synth(const Options& opts) {
  const auto c = load_config_doc(opts.config);
  SyntheticSpec spec = c.doc.contains("synthetic") ? synthetic_spec_from_json(c.doc.at("synthetic"))
                                                   : SyntheticSpec{};
  if (opts.seed_given) spec.seed = opts.seed;
  const auto src = load_synthetic(spec);
  OutputDir out(opts.out, "synth");
  write_source(out, src.data, src.meta);
  out.write_json("spec.json", to_json(spec), "synthetic-spec");
  out.finish(opts, {{"seed", spec.seed}, {"summary", dataset_summary(src.data, src.meta)}});
  std::cout << "generated " << src.data.size() << " sequences\n";
  return 0;
}

PipelineConfig pipeline_config(const ConfigDoc& c, const Options& opts) {
  PipelineConfig cfg = pipeline_config_from_json(c.doc);
  if (opts.seed_given) cfg.master_seed = opts.seed;
  if (!opts.registration.empty()) cfg.registration.method = parse_registration(opts.registration);
  if (!opts.variant.empty()) cfg.variant = parse_variant(opts.variant);
  cfg.validate();
  return cfg;
}

void write_report(OutputDir& out, const RunReport& report) {
  out.write("report.json", emit_report(report, ReportFormat::kJson), "report");
  out.write("report.csv", emit_report(report, ReportFormat::kCsv), "report");
}

int cmd_train(const Options& opts) {
  const auto c = load_config_doc(opts.config);
  const auto cfg = pipeline_config(c, opts);
  const auto src = load_data(c);
  const auto result = run_pipeline(src.data, src.meta, cfg);

  OutputDir out(opts.out, "train");
  const json resolved = with_source(to_json(cfg), src);
  out.write_json("config.json", resolved, "config");
  write_report(out, result.report);
  out.write_json("timings.json", result.report.timings, "timings");
  json index = json::array();
  for (std::size_t i = 0; i < result.folds.size(); ++i) {
    const auto file = fold_file_name(i, result.folds[i].name);
    out.write_json(file, to_json(result.folds[i]), "fold-model");
    index.push_back({{"name", result.folds[i].name}, {"file", file}});
  }
  out.write_json("folds/index.json", index, "fold-index");
  out.finish(opts, {{"seed", cfg.master_seed}, {"accuracy", result.report.accuracy}});
  std::cout << "accuracy " << result.report.accuracy << " over " << result.folds.size() << " folds\n";
  return 0;
}

int cmd_eval(const Options& opts) {
  if (opts.artifacts.empty()) throw ConfigError("eval needs --artifacts DIR");
  const fs::path dir = fs::absolute(opts.artifacts);
  ConfigDoc saved;
  saved.doc = parse_json_file(dir / "config.json", true);
  saved.base = dir;
  const auto cfg = pipeline_config_from_json(saved.doc);
  const auto src = opts.config.empty() ? load_data(saved) : load_data(load_config_doc(opts.config));

  std::vector<FoldArtifacts> folds;
  const auto index = parse_json_file(dir / "folds/index.json", false);
  try {
    for (const auto& entry : index)
      folds.push_back(fold_artifacts_from_json(parse_json_file(dir / entry.at("file").get<std::string>(), false)));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed fold artifacts: ") + e.what());
  }
  const auto report = evaluate_pipeline(src.data, src.meta, cfg, folds);

  OutputDir out(opts.out, "eval");
  write_report(out, report);
  out.finish(opts, {{"artifacts", dir.string()}, {"accuracy", report.accuracy}});
  std::cout << "accuracy " << report.accuracy << "\n";
  return 0;
}

int cmd_restore(const Options& opts) {
  const auto c = load_config_doc(opts.config);
  const auto& doc = c.doc;
  RestorationSetup setup;
  std::vector<int> train_subjects;
  config_section("restore", [&] {
    if (doc.contains("train")) {
      setup.train = train_config_from_json(doc.at("train"));
      setup.hidden_sizes = doc.at("train").value("hidden_sizes", setup.hidden_sizes);
    }
    if (doc.contains("preprocess")) {
      setup.target_length = doc.at("preprocess").value("target_length", setup.target_length);
      setup.chunk_count = doc.at("preprocess").value("chunk_count", setup.chunk_count);
    }
    setup.seed = doc.value("seed", setup.seed);
    if (doc.contains("restore")) {
      const auto& r = doc.at("restore");
      reject_unknown(r, "restore", {"joint_drop", "noise_sigma", "train_subjects"});
      setup.corruption.joint_drop = r.value("joint_drop", setup.corruption.joint_drop);
      setup.corruption.noise_sigma = r.value("noise_sigma", setup.corruption.noise_sigma);
      train_subjects = r.value("train_subjects", train_subjects);
    }
    return 0;
  });
  if (opts.seed_given) setup.seed = opts.seed;
  setup.train.validate();
  setup.corruption.validate();

  DataSource src;
  if (doc.contains("dataset") || doc.contains("synthetic")) {
    src = load_data(c);
  } else {
    SyntheticSpec spec;
    spec.class_count = 3;
    spec.joint_count = 6;
    spec.noise_sigma = 0.0;
    src = load_synthetic(spec);
  }
  if (train_subjects.empty()) {
    const auto ids = subject_ids(src.data);
    train_subjects.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>((ids.size() + 1) / 2));
  }
  const auto r = run_restoration(src.data, src.meta, train_subjects, setup);

  OutputDir out(opts.out, "restore");
  out.write("clean.jsonl", write_canonical(r.clean, src.meta), "dataset");
  out.write("corrupted.jsonl", write_canonical(r.corrupted, src.meta), "dataset");
  out.write("restored.jsonl", write_canonical(r.restored, src.meta), "dataset");
  out.write_json("meta.json", to_json(src.meta), "meta");
  const json summary = {{"corrupted_mse", r.corrupted_mse},
                        {"restored_mse", r.restored_mse},
                        {"ratio", r.restored_mse / r.corrupted_mse},
                        {"clean_passthrough_mse", r.clean_passthrough_mse},
                        {"final_training_loss", r.final_training_loss},
                        {"train_subjects", train_subjects},
                        {"joint_drop", setup.corruption.joint_drop},
                        {"noise_sigma", setup.corruption.noise_sigma},
                        {"hidden_sizes", setup.hidden_sizes},
                        {"train", to_json(setup.train)},
                        {"source", src.section}};
  out.write_json("restore.json", summary, "restoration");
  out.finish(opts, {{"seed", setup.seed}});
  std::cout << "corrupted mse " << r.corrupted_mse << ", restored mse " << r.restored_mse << "\n";
  return 0;
}

int cmd_report(const Options& opts) {
  if (opts.inputs.size() != 1) throw ConfigError("report needs exactly one saved report");
  RunReport report;
  try {
    report = report_from_json(parse_json_file(opts.inputs.front(), false));
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  const auto format = parse_report_format(opts.report_format);
  const auto text = emit_report(report, format);
  if (opts.out.empty()) {
    std::cout << text;
    return 0;
  }
  OutputDir out(opts.out, "report");
  out.write(format == ReportFormat::kJson ? "report.json" : "report.csv", text, "report");
  out.finish(opts);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Options opts;
  opts.argv.assign(argv, argv + argc);

  CLI::App app{"Skeleton action recognition: ingestion, training, evaluation and restoration"};
  app.require_subcommand(1);

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config, "JSON config file")->check(CLI::ExistingFile);
  };
  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& v) { opts.seed = v; opts.seed_given = true; },
        "Master seed override");
  };
  auto add_out = [&](CLI::App* cmd, bool required) {
    auto* o = cmd->add_option("--out", opts.out, "Output directory");
    if (required) o->required();
  };

  auto* convert = app.add_subcommand("convert", "Raw dataset files to canonical JSONL");
  add_config(convert);
  convert->add_option("--format", opts.format, "msr, utkinect, florence or canonical")
      ->check(CLI::IsMember({"msr", "utkinect", "florence", "canonical"}));
  convert->add_option("--meta", opts.meta, "Layout name or meta JSON file");
  convert->add_option("inputs", opts.inputs, "Files or directories");
  add_out(convert, true);

  auto* synth = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  add_config(synth);
  add_seed(synth);
  add_out(synth, true);

  auto* train = app.add_subcommand("train", "Run the full pipeline on a protocol");
  add_config(train);
  add_seed(train);
  train->add_option("--registration", opts.registration)->check(CLI::IsMember({"lwsr", "dtw", "none"}));
  train->add_option("--variant", opts.variant)
      ->check(CLI::IsMember({"dae", "dae_cc", "dae_tc", "dae_ctc", "jp"}));
  add_out(train, true);

  auto* eval = app.add_subcommand("eval", "Test saved fold artifacts");
  eval->add_option("--artifacts", opts.artifacts, "Output directory of a train run")
      ->required()
      ->check(CLI::ExistingDirectory);
  add_config(eval);
  add_out(eval, true);

  auto* restore = app.add_subcommand("restore", "Corrupt, restore and score held-out sequences");
  add_config(restore);
  add_seed(restore);
  add_out(restore, true);

  auto* report = app.add_subcommand("report", "Re-render a saved report");
  report->add_option("input", opts.inputs, "report.json")->required()->check(CLI::ExistingFile);
  report->add_option("--format", opts.report_format)->check(CLI::IsMember({"json", "csv"}));
  add_out(report, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*convert) return cmd_convert(opts);
    if (*synth) return cmd_synth(opts);
    if (*train) return cmd_train(opts);
    if (*eval) return cmd_eval(opts);
    if (*restore) return cmd_restore(opts);
    if (*report) return cmd_report(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitConfig;
}
