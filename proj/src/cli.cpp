#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "vqrf/harness.hpp"

namespace vqrf {

namespace {

namespace fs = std::filesystem;

std::vector<std::vector<EpochMetrics>> parse_metrics_csv(const std::string& text) {
  std::vector<std::vector<EpochMetrics>> per_trial;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw HarnessError("metrics row has " + std::to_string(cells.size()) + " cells");
    if (cells[1] == "mean" || cells[1] == "var") continue;
    const auto trial = static_cast<std::size_t>(std::stoul(cells[1]));
    if (per_trial.size() <= trial) per_trial.resize(trial + 1);
    EpochMetrics m;
    m.epoch = std::stoul(cells[0]);
    m.train_loss_mean = std::stod(cells[2]);
    m.train_loss_accrued = std::stod(cells[3]);
    m.test_loss = std::stod(cells[4]);
    m.test_accuracy = std::stod(cells[5]);
    per_trial[trial].push_back(m);
  }
  return per_trial;
}

void print_final(std::ostream& os, std::string_view model,
                 const std::vector<std::vector<EpochMetrics>>& per_trial) {
  double loss = 0.0, acc = 0.0;
  for (const auto& t : per_trial) {
    loss += t.back().train_loss_mean;
    acc += t.back().test_accuracy;
  }
  const auto n = static_cast<double>(per_trial.size());
  os << model << ": final train loss " << loss / n << ", test accuracy " << acc / n << " ("
     << per_trial.size() << " trials)\n";
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Variational quantum RF sensing experiments"};
  app.require_subcommand(1);

  std::string scene_path, target = "A", mode = "balanced", out_path;
  std::size_t m = 2000;
  std::uint64_t seed = 2024;
  auto* gen = app.add_subcommand("generate", "Trace a labelled dataset");
  gen->add_option("--scene", scene_path, "Scene JSON file")->required();
  gen->add_option("--target", target, "Target region name");
  gen->add_option("--m", m, "Number of locations");
  gen->add_option("--mode", mode, "uniform or balanced")->check(CLI::IsMember({"uniform", "balanced"}));
  gen->add_option("--seed", seed, "Sampling seed");
  gen->add_option("--out", out_path, "Output dataset file")->required();

  std::string model_name = "hybrid", dataset_path, config_path, out_dir;
  auto* train = app.add_subcommand("train", "Train one model for one trial");
  train->add_option("--model", model_name, "hybrid or lstm")->check(CLI::IsMember({"hybrid", "lstm"}));
  train->add_option("--dataset", dataset_path, "Dataset file")->required();
  train->add_option("--config", config_path, "Experiment config")->required();
  train->add_option("--out", out_dir, "Output directory")->required();

  auto* trials = app.add_subcommand("trials", "Generate data and run every trial");
  trials->add_option("--config", config_path, "Experiment config")->required();
  trials->add_option("--out", out_dir, "Output directory")->required();

  std::string checkpoint_path;
  auto* eval = app.add_subcommand("eval", "Score a checkpoint on the test split");
  eval->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  eval->add_option("--dataset", dataset_path, "Dataset file")->required();

  std::string metrics_path;
  auto* plot = app.add_subcommand("plot", "Emit gnuplot-ready mean/variance columns");
  plot->add_option("--metrics", metrics_path, "Metrics CSV")->required();
  plot->add_option("--out", out_path, "Output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*gen) {
      const Scene scene = load_scene_file(scene_path);
      ExperimentConfig config;
      config.target = target;
      config.samples = m;
      config.sampling = parse_sampling_mode(mode);
      config.data_seed = seed;
      const Dataset ds = generate_dataset(scene, config);
      write_text_file(out_path, serialize_dataset(ds));
      std::cout << "wrote " << ds.records.size() << " records (" << ds.count(Split::kTrain)
                << " train / " << ds.count(Split::kTest) << " test) to " << out_path << "\n";
    } else if (*train) {
      const ExperimentConfig config = load_config(config_path);
      const Scene scene = load_scene_file(config.scene_path);
      const std::string text = read_text_file(dataset_path);
      const Dataset ds = parse_dataset(text);
      const ModelKind kind = parse_model_kind(model_name);
      const TrainContext ctx{scene.carrier_frequency_hz, fnv1a_hex(text), config.seeds.front()};
      const TrainResult result = train_model(kind, config, ds, ctx);
      fs::create_directories(out_dir);
      write_text_file((fs::path(out_dir) / "checkpoint.json").string(), result.checkpoint.dump(1) + "\n");
      write_text_file((fs::path(out_dir) / "metrics.csv").string(), metrics_csv({result.metrics}));
      std::cout << model_name << ": " << result.parameter_count << " trainable parameters\n";
      print_final(std::cout, model_name, {result.metrics});
    } else if (*trials) {
      const ExperimentConfig config = load_config(config_path);
      const Scene scene = load_scene_file(config.scene_path);
      const Dataset ds = generate_dataset(scene, config);
      const std::string text = serialize_dataset(ds);
      const std::string hash = fnv1a_hex(text);
      fs::create_directories(out_dir);
      write_text_file((fs::path(out_dir) / "dataset.jsonl").string(), text);
      for (ModelKind kind : config.models) {
        const auto summary = run_trials(kind, config, scene, ds, hash);
        const std::string name(to_string(kind));
        write_text_file((fs::path(out_dir) / ("metrics_" + name + ".csv")).string(),
                        metrics_csv(summary.per_trial));
        print_final(std::cout, name, summary.per_trial);
      }
    } else if (*eval) {
      const auto checkpoint = nlohmann::json::parse(read_text_file(checkpoint_path));
      const std::string text = read_text_file(dataset_path);
      const auto r = evaluate(checkpoint, parse_dataset(text), fnv1a_hex(text));
      std::cout << "test samples " << r.total << ", loss " << r.loss << ", accuracy " << r.accuracy
                << "\n";
    } else if (*plot) {
      const auto columns = gnuplot_columns(parse_metrics_csv(read_text_file(metrics_path)));
      if (out_path.empty()) {
        std::cout << columns;
      } else {
        write_text_file(out_path, columns);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace vqrf
