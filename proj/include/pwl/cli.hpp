#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pwl/codegen.hpp"
#include "pwl/csv.hpp"
#include "pwl/distill.hpp"
#include "pwl/error.hpp"
#include "pwl/fitter.hpp"
#include "pwl/model.hpp"
#include "pwl/model_json.hpp"

namespace pwl {
namespace cli {

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Empty path means stdout.
inline void write_output(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  f << content;
  if (!f) throw std::runtime_error("failed writing output file: " + path);
}

inline std::string format_score(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct FitFlags {
  int segments = 5;
  std::string mono = "none";
  int samples = 100;
  std::uint64_t seed = 0;
  std::string fx = "auto";
};

inline void add_fit_flags(CLI::App* cmd, FitFlags& flags) {
  cmd->add_option("--segments", flags.segments, "Number of curve segments")
      ->capture_default_str();
  cmd->add_option("--mono", flags.mono, "Monotonicity: auto, none, up or down")
      ->check(CLI::IsMember({"auto", "none", "up", "down"}))
      ->capture_default_str();
  cmd->add_option("--samples", flags.samples, "Number of candidate knots")
      ->capture_default_str();
  cmd->add_option("--seed", flags.seed, "Random seed for downsampling")->capture_default_str();
  cmd->add_option("--fx", flags.fx, "x-transform: auto, identity, log, log1p or symlog1p")
      ->check(CLI::IsMember({"auto", "identity", "log", "log1p", "symlog1p"}))
      ->capture_default_str();
}

inline FitConfig to_config(const FitFlags& flags) {
  FitConfig config;
  config.num_segments = flags.segments;
  config.num_samples = flags.samples;
  config.seed = flags.seed;
  if (flags.mono == "auto") {
    config.mono = MonoPolicy::kAuto;
  } else if (flags.mono == "up") {
    config.mono = MonoPolicy::kIncreasing;
  } else if (flags.mono == "down") {
    config.mono = MonoPolicy::kDecreasing;
  } else {
    config.mono = MonoPolicy::kNone;
  }
  if (flags.fx != "auto") config.fx = transform_from_name(flags.fx);
  return config;
}

inline TeacherSampleTable read_teacher_table(const std::string& path) {
  return teacher_table_from_json(nlohmann::json::parse(read_file(path)));
}

// Long-format evaluation samples: feature,x,y[,weight].
inline TeacherSampleTable read_eval_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  const CsvTable csv = read_csv(in);
  const std::size_t fi = csv.column_index("feature");
  const std::size_t xi = csv.column_index("x");
  const std::size_t yi = csv.column_index("y");
  const bool has_weight = csv.has_column("weight");
  const std::size_t wi = has_weight ? csv.column_index("weight") : 0;

  TeacherSampleTable table;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const std::size_t line_number = r + 2;
    const std::string& name = csv.rows[r][fi];
    FeatureSamples* feature = nullptr;
    for (FeatureSamples& f : table.features) {
      if (f.name == name) {
        feature = &f;
        break;
      }
    }
    if (feature == nullptr) {
      table.features.push_back({name, FeatureKind::kNumerical, {}});
      feature = &table.features.back();
    }
    WeightedPoint p;
    p.x = csv_to_double(csv.rows[r][xi], line_number);
    p.y = csv_to_double(csv.rows[r][yi], line_number);
    p.weight = has_weight ? csv_to_double(csv.rows[r][wi], line_number) : 1.0;
    feature->samples.push_back(p);
  }
  return table;
}

struct FitArgs {
  FitFlags flags;
  std::string input;
  std::string out_path;
  std::string emit = "literal";
  std::string name = "curve";
};

inline int run_fit(const FitArgs& args, std::ostream& out) {
  std::ifstream in(args.input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + args.input);
  const PointSet pts = points_from_csv(read_csv(in));
  const FitResult result = fit_pwl_result(pts, to_config(args.flags), args.name);
  std::string rendered;
  if (args.emit == "json") {
    rendered = component_to_json(CurveComponent(result.curve)).dump(2) + "\n";
  } else {
    rendered = emit_curve_literal(result.curve) + "\n";
  }
  write_output(args.out_path, rendered, out);
  return 0;
}

struct DistillArgs {
  FitFlags flags;
  std::string teacher;
  std::string out_path;
  std::string emit_code_path;
};

inline int run_distill(const DistillArgs& args, std::ostream& out) {
  const TeacherSampleTable table = read_teacher_table(args.teacher);
  const CurveModel model = distill_model(table, to_config(args.flags));
  write_output(args.out_path, write_model_json(model), out);
  if (!args.emit_code_path.empty()) {
    write_output(args.emit_code_path, emit_model_code(model), out);
  }
  return 0;
}

struct EvalArgs {
  std::string model_path;
  std::string input;
  std::string out_path;
};

inline int run_eval(const EvalArgs& args, std::ostream& out) {
  const CurveModel model = read_model_json(detail::read_file(args.model_path));
  std::ifstream in(args.input, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + args.input);
  const CsvTable csv = read_csv(in);

  std::string rendered;
  for (std::size_t i = 0; i < csv.header.size(); ++i) {
    if (i > 0) rendered += ",";
    rendered += csv.header[i];
  }
  rendered += ",score\n";
  FeatureMap features;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    features.clear();
    for (std::size_t i = 0; i < csv.header.size(); ++i) {
      features[csv.header[i]] = csv_to_double(csv.rows[r][i], r + 2);
    }
    const double score = model.eval(features);
    for (std::size_t i = 0; i < csv.rows[r].size(); ++i) {
      if (i > 0) rendered += ",";
      rendered += csv.rows[r][i];
    }
    rendered += "," + format_score(score) + "\n";
  }
  write_output(args.out_path, rendered, out);
  return 0;
}

struct AttributeArgs {
  FitFlags flags;
  std::string teacher;
  std::string eval_path;
  std::string out_path;
};

inline int run_attribute(const AttributeArgs& args, std::ostream& out) {
  const TeacherSampleTable teacher = read_teacher_table(args.teacher);
  const TeacherSampleTable eval_table = read_eval_csv(args.eval_path);
  const AttributionReport report = attribute_failures(teacher, eval_table, to_config(args.flags));
  std::string rendered = "feature,delta\n";
  for (const AttributionEntry& row : report) {
    rendered += row.feature + "," + format_score(row.delta) + "\n";
  }
  write_output(args.out_path, rendered, out);
  return 0;
}

}  // namespace detail

// Exit codes: 0 success, 2 usage error, 3 data error. Diagnostics go to err.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Piecewise-linear curve fitting, distillation and scoring"};
  app.require_subcommand(1);

  detail::FitArgs fit_args;
  CLI::App* fit_cmd = app.add_subcommand("fit", "Fit a curve to x,y[,weight] CSV data");
  fit_cmd->add_option("--input", fit_args.input, "Input CSV with header x,y[,weight]")
      ->required();
  detail::add_fit_flags(fit_cmd, fit_args.flags);
  fit_cmd->add_option("--emit", fit_args.emit, "Output format")
      ->check(CLI::IsMember({"literal", "json"}))
      ->capture_default_str();
  fit_cmd->add_option("--name", fit_args.name, "Curve name")->capture_default_str();
  fit_cmd->add_option("--out", fit_args.out_path, "Output path (default: stdout)");

  detail::DistillArgs distill_args;
  CLI::App* distill_cmd =
      app.add_subcommand("distill", "Distill a teacher sample table into a curve model");
  distill_cmd->add_option("--teacher", distill_args.teacher, "Teacher sample table JSON")
      ->required();
  detail::add_fit_flags(distill_cmd, distill_args.flags);
  distill_cmd->add_option("--out", distill_args.out_path, "Model JSON output path")->required();
  distill_cmd->add_option("--emit-code", distill_args.emit_code_path,
                          "Also write curve literals to this path");

  detail::EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score a feature CSV with a model");
  eval_cmd->add_option("--model", eval_args.model_path, "Model JSON path")->required();
  eval_cmd->add_option("--input", eval_args.input, "Feature CSV (header = feature names)")
      ->required();
  eval_cmd->add_option("--out", eval_args.out_path, "Output CSV path (default: stdout)");

  detail::AttributeArgs attribute_args;
  CLI::App* attribute_cmd = app.add_subcommand(
      "attribute", "Rank features by distillation error against teacher outputs");
  attribute_cmd->add_option("--teacher", attribute_args.teacher, "Teacher sample table JSON")
      ->required();
  detail::add_fit_flags(attribute_cmd, attribute_args.flags);
  attribute_cmd
      ->add_option("--eval", attribute_args.eval_path, "Evaluation CSV: feature,x,y[,weight]")
      ->required();
  attribute_cmd->add_option("--out", attribute_args.out_path, "Report CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (fit_cmd->parsed()) return detail::run_fit(fit_args, out);
    if (distill_cmd->parsed()) return detail::run_distill(distill_args, out);
    if (eval_cmd->parsed()) return detail::run_eval(eval_args, out);
    if (attribute_cmd->parsed()) return detail::run_attribute(attribute_args, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("pwlcurve");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cli
}  // namespace pwl
