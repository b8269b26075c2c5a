#include "vqrf/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>
#include <sstream>

namespace vqrf {

using nlohmann::json;

namespace {

// Independent generator streams derived from one trial seed.
enum class Stream : std::uint32_t { kInit = 1, kShuffle = 2, kDropout = 3, kSplit = 4 };

Rng make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::kCrossEntropy ? "cross_entropy" : "mse";
}

LossKind parse_loss(std::string_view name) {
  if (name == "cross_entropy") return LossKind::kCrossEntropy;
  if (name == "mse") return LossKind::kMse;
  throw HarnessError("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(GradientMethod m) {
  return m == GradientMethod::kAdjoint ? "adjoint" : "parameter_shift";
}

GradientMethod parse_gradient(std::string_view name) {
  if (name == "adjoint") return GradientMethod::kAdjoint;
  if (name == "parameter_shift") return GradientMethod::kParameterShift;
  throw HarnessError("unknown gradient method '" + std::string(name) + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

ModelKind parse_model_kind(std::string_view name) {
  if (name == "hybrid") return ModelKind::kHybrid;
  if (name == "lstm") return ModelKind::kLstm;
  throw HarnessError("unknown model '" + std::string(name) + "'");
}

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::kHybrid ? "hybrid" : "lstm";
}

std::size_t ExperimentConfig::test_size() const {
  const auto train = static_cast<std::size_t>(std::llround(train_fraction * samples));
  return samples - train;
}

void ExperimentConfig::validate() const {
  if (samples < 2) throw HarnessError("samples must be at least 2");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw HarnessError("train_fraction must lie in (0, 1)");
  }
  if (test_size() == 0 || test_size() == samples) throw HarnessError("split leaves an empty side");
  if (batch_size == 0) throw HarnessError("batch_size must be positive");
  if (seeds.empty()) throw HarnessError("at least one trial seed required");
  if (!(hybrid_learning_rate >= 0.0) || !(lstm_learning_rate >= 0.0)) {
    throw HarnessError("learning rates must be non-negative");
  }
  if (!(target_angle > 0.0)) throw HarnessError("target_angle must be positive");
  if (ansatz.num_qubits != head.inputs) throw HarnessError("head inputs must equal probe qubits");
  radio.validate();
}

json to_json(const ExperimentConfig& c) {
  json models = json::array();
  for (auto m : c.models) models.push_back(std::string(to_string(m)));
  return json{
      {"scene", c.scene_path},
      {"target", c.target},
      {"samples", c.samples},
      {"train_fraction", c.train_fraction},
      {"batch_size", c.batch_size},
      {"epochs", c.epochs},
      {"sampling", std::string(to_string(c.sampling))},
      {"inside_fraction", c.inside_fraction},
      {"data_seed", c.data_seed},
      {"seeds", c.seeds},
      {"models", models},
      {"radio",
       {{"coupling", c.radio.coupling},
        {"reflection_magnitude", c.radio.reflection_magnitude},
        {"reflection_phase", c.radio.reflection_phase},
        {"max_order", c.radio.max_order}}},
      {"hybrid",
       {{"learning_rate", c.hybrid_learning_rate},
        {"optimizer", std::string(to_string(c.hybrid_optimizer))},
        {"target_angle", c.target_angle},
        {"detuning", c.detuning},
        {"loss", std::string(to_string(c.loss))},
        {"gradient", std::string(to_string(c.gradient))},
        {"qubits", c.ansatz.num_qubits},
        {"layers", c.ansatz.layers},
        {"hidden1", c.head.hidden1},
        {"hidden2", c.head.hidden2},
        {"dropout", c.head.dropout}}},
      {"lstm",
       {{"learning_rate", c.lstm_learning_rate},
        {"optimizer", std::string(to_string(c.lstm_optimizer))},
        {"hidden", c.lstm.hidden}}},
  };
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.scene_path = j.value("scene", c.scene_path);
    c.target = j.value("target", c.target);
    c.samples = j.value("samples", c.samples);
    c.train_fraction = j.value("train_fraction", c.train_fraction);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.epochs = j.value("epochs", c.epochs);
    if (j.contains("sampling")) c.sampling = parse_sampling_mode(j["sampling"].get<std::string>());
    c.inside_fraction = j.value("inside_fraction", c.inside_fraction);
    c.data_seed = j.value("data_seed", c.data_seed);
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("models")) {
      c.models.clear();
      for (const auto& m : j["models"]) c.models.push_back(parse_model_kind(m.get<std::string>()));
    }
    if (j.contains("radio")) {
      const auto& r = j["radio"];
      c.radio.coupling = r.value("coupling", c.radio.coupling);
      c.radio.reflection_magnitude = r.value("reflection_magnitude", c.radio.reflection_magnitude);
      c.radio.reflection_phase = r.value("reflection_phase", c.radio.reflection_phase);
      c.radio.max_order = r.value("max_order", c.radio.max_order);
    }
    if (j.contains("hybrid")) {
      const auto& h = j["hybrid"];
      c.hybrid_learning_rate = h.value("learning_rate", c.hybrid_learning_rate);
      if (h.contains("optimizer")) c.hybrid_optimizer = parse_optimizer(h["optimizer"].get<std::string>());
      c.target_angle = h.value("target_angle", c.target_angle);
      c.detuning = h.value("detuning", c.detuning);
      if (h.contains("loss")) c.loss = parse_loss(h["loss"].get<std::string>());
      if (h.contains("gradient")) c.gradient = parse_gradient(h["gradient"].get<std::string>());
      c.ansatz.num_qubits = h.value("qubits", c.ansatz.num_qubits);
      c.ansatz.layers = h.value("layers", c.ansatz.layers);
      c.head.inputs = c.ansatz.num_qubits;
      c.head.hidden1 = h.value("hidden1", c.head.hidden1);
      c.head.hidden2 = h.value("hidden2", c.head.hidden2);
      c.head.dropout = h.value("dropout", c.head.dropout);
    }
    if (j.contains("lstm")) {
      const auto& l = j["lstm"];
      c.lstm_learning_rate = l.value("learning_rate", c.lstm_learning_rate);
      if (l.contains("optimizer")) c.lstm_optimizer = parse_optimizer(l["optimizer"].get<std::string>());
      c.lstm.hidden = l.value("hidden", c.lstm.hidden);
    }
  } catch (const json::exception& e) {
    throw HarnessError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw HarnessError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw HarnessError("config '" + path + "': " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  const std::filesystem::path scene(c.scene_path);
  if (scene.is_relative()) {
    c.scene_path = (std::filesystem::path(path).parent_path() / scene).lexically_normal().string();
  }
  return c;
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string config_hash(const ExperimentConfig& config) {
  auto j = to_json(config);
  // Where the scene file lives is not part of the experiment.
  j.erase("scene");
  return fnv1a_hex(j.dump());
}

std::size_t Dataset::count(Split split) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [&](const Record& r) { return r.split == split; }));
}

Dataset generate_dataset(const Scene& scene, const ExperimentConfig& config) {
  config.validate();
  const TargetRegion& region = scene.target(config.target);
  const auto samples = sample_locations(scene, region, config.samples, config.sampling,
                                        config.data_seed, config.inside_fraction);
  Dataset ds;
  ds.records.reserve(samples.size());
  for (const auto& s : samples) {
    Record r;
    r.m = s.index;
    r.position = s.position;
    r.label = s.label;
    r.paths = trace_paths(scene, s.position, config.radio);
    ds.records.push_back(std::move(r));
  }
  std::vector<std::size_t> perm(ds.records.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng = make_rng(config.data_seed, Stream::kSplit);
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t test = config.test_size();
  for (std::size_t i = 0; i < perm.size(); ++i) {
    ds.records[perm[i]].split = i < perm.size() - test ? Split::kTrain : Split::kTest;
  }
  return ds;
}

std::string serialize_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& r : dataset.records) {
    json paths = json::array();
    for (const auto& p : r.paths.paths) {
      paths.push_back(json{{"k", p.transmitter},
                           {"n", p.reflections()},
                           {"d_m", p.length_m},
                           {"tau_s", p.delay_s},
                           {"a_re", p.gain.real()},
                           {"a_im", p.gain.imag()}});
    }
    json rec{{"m", r.m},
             {"x", r.position.x},
             {"y", r.position.y},
             {"label", r.label},
             {"split", r.split == Split::kTrain ? "train" : "test"},
             {"paths", std::move(paths)}};
    out += rec.dump();
    out += '\n';
  }
  return out;
}

Dataset parse_dataset(std::string_view text) {
  Dataset ds;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      Record r;
      r.m = j.at("m").get<std::size_t>();
      r.position = {j.at("x").get<double>(), j.at("y").get<double>()};
      r.label = j.at("label").get<int>();
      if (r.label != 0 && r.label != 1) throw HarnessError("label must be 0 or 1");
      const auto split = j.value("split", std::string("train"));
      if (split != "train" && split != "test") throw HarnessError("split must be train or test");
      r.split = split == "train" ? Split::kTrain : Split::kTest;
      r.paths.receiver = r.position;
      for (const auto& p : j.at("paths")) {
        Path path;
        path.transmitter = p.at("k").get<std::size_t>();
        path.length_m = p.at("d_m").get<double>();
        path.delay_s = p.at("tau_s").get<double>();
        path.gain = {p.at("a_re").get<double>(), p.at("a_im").get<double>()};
        path.walls.assign(p.at("n").get<std::size_t>(), 0);  // wall ids are not stored
        r.paths.paths.push_back(std::move(path));
      }
      ds.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw HarnessError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return ds;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HarnessError("cannot write '" + path + "'");
  out << text;
  if (!out) throw HarnessError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HarnessError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::vector<Example> field_examples(const Dataset& ds, Split split, double angular_freq,
                                    double t_int, double detuning) {
  std::vector<Example> out;
  for (const auto& r : ds.records) {
    if (r.split != split) continue;
    out.push_back({interaction_params(superpose(r.paths, angular_freq), t_int, detuning), r.label});
  }
  return out;
}

struct SequenceExample {
  PhaseSequence seq;
  int label = 1;
};

std::vector<SequenceExample> sequence_examples(const Dataset& ds, Split split,
                                               double angular_freq) {
  std::vector<SequenceExample> out;
  for (const auto& r : ds.records) {
    if (r.split == split) out.push_back({phase_sequence(r.paths, angular_freq), r.label});
  }
  return out;
}

void check_finite(double loss, ModelKind model, std::size_t epoch) {
  if (!std::isfinite(loss)) {
    throw HarnessError(std::string(to_string(model)) + " training diverged: non-finite loss in epoch " +
                       std::to_string(epoch));
  }
}

EvalResult score_hybrid(const HybridModel& model, const std::vector<Example>& test, LossKind loss) {
  EvalResult r;
  const StateVector probe = model.prepare_probe();
  for (const auto& ex : test) {
    const auto logits =
        model.head().forward(HybridModel::sense_probe(probe, ex.field), false, nullptr);
    r.loss += loss_from_logits(logits, ex.label, loss);
    r.correct += argmax(logits) == ex.label ? 1 : 0;
  }
  r.total = test.size();
  r.loss /= static_cast<double>(r.total);
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

EvalResult score_lstm(const Lstm& lstm, const std::vector<SequenceExample>& test, LossKind loss) {
  EvalResult r;
  for (const auto& ex : test) {
    const auto logits = lstm.forward(ex.seq);
    r.loss += loss_from_logits(logits, ex.label, loss);
    r.correct += argmax(logits) == ex.label ? 1 : 0;
  }
  r.total = test.size();
  r.loss /= static_cast<double>(r.total);
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

json base_checkpoint(ModelKind kind, const ExperimentConfig& config, const TrainContext& ctx) {
  return json{{"model", std::string(to_string(kind))},
              {"seed", ctx.seed},
              {"config_hash", config_hash(config)},
              {"dataset_hash", ctx.dataset_hash},
              {"carrier_frequency_hz", ctx.carrier_frequency_hz},
              {"loss", std::string(to_string(config.loss))}};
}

}  // namespace

TrainResult train_hybrid(const ExperimentConfig& config, const Dataset& dataset,
                         const TrainContext& ctx) {
  config.validate();
  const double w = angular_frequency(ctx.carrier_frequency_hz);

  // Calibrate the interaction time on the training split only.
  std::vector<double> omegas;
  for (const auto& r : dataset.records) {
    if (r.split == Split::kTrain) omegas.push_back(std::abs(superpose(r.paths, w)));
  }
  const double t_int = calibrate_time(omegas, config.target_angle);
  const auto train = field_examples(dataset, Split::kTrain, w, t_int, config.detuning);
  const auto test = field_examples(dataset, Split::kTest, w, t_int, config.detuning);
  if (train.empty() || test.empty()) throw HarnessError("dataset lacks a train or test split");

  HybridModel model(config.ansatz, config.head);
  Rng init_rng = make_rng(ctx.seed, Stream::kInit);
  Rng shuffle_rng = make_rng(ctx.seed, Stream::kShuffle);
  Rng dropout_rng = make_rng(ctx.seed, Stream::kDropout);
  model.init(init_rng);
  Optimizer opt_lambda(config.hybrid_optimizer, config.hybrid_learning_rate, model.lambda().size());
  Optimizer opt_gamma(config.hybrid_optimizer, config.hybrid_learning_rate,
                      model.head().num_params());

  TrainResult result;
  result.parameter_count = model.lambda().size() + model.head().num_params();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Example> batch;
  double accrued = 0.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      const auto g = model.grad(batch, config.loss, true, &dropout_rng, config.gradient);
      check_finite(g.loss, ModelKind::kHybrid, epoch);
      loss_sum += g.loss * static_cast<double>(batch.size());
      opt_lambda.step(model.lambda(), g.d_lambda);
      opt_gamma.step(model.head().params(), g.d_gamma);
      ++result.parameter_updates;
    }
    const auto eval = score_hybrid(model, test, config.loss);
    ++result.evaluations;
    check_finite(eval.loss, ModelKind::kHybrid, epoch);
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss_mean = loss_sum / static_cast<double>(train.size());
    accrued += m.train_loss_mean;
    m.train_loss_accrued = accrued;
    m.test_loss = eval.loss;
    m.test_accuracy = eval.accuracy;
    result.metrics.push_back(m);
  }

  json ck = base_checkpoint(ModelKind::kHybrid, config, ctx);
  ck["t_int"] = t_int;
  ck["detuning"] = config.detuning;
  ck["qubits"] = config.ansatz.num_qubits;
  ck["layers"] = config.ansatz.layers;
  ck["hidden1"] = config.head.hidden1;
  ck["hidden2"] = config.head.hidden2;
  ck["dropout"] = config.head.dropout;
  ck["lambda"] = std::vector<double>(model.lambda().begin(), model.lambda().end());
  ck["gamma"] = std::vector<double>(model.head().params().begin(), model.head().params().end());
  result.checkpoint = std::move(ck);
  return result;
}

TrainResult train_baseline(const ExperimentConfig& config, const Dataset& dataset,
                           const TrainContext& ctx) {
  config.validate();
  const double w = angular_frequency(ctx.carrier_frequency_hz);
  const auto train = sequence_examples(dataset, Split::kTrain, w);
  const auto test = sequence_examples(dataset, Split::kTest, w);
  if (train.empty() || test.empty()) throw HarnessError("dataset lacks a train or test split");

  Lstm lstm(config.lstm);
  Rng init_rng = make_rng(ctx.seed, Stream::kInit);
  Rng shuffle_rng = make_rng(ctx.seed, Stream::kShuffle);
  lstm.init_uniform(init_rng);
  Optimizer opt(config.lstm_optimizer, config.lstm_learning_rate, lstm.num_params());

  TrainResult result;
  result.parameter_count = count_parameters(lstm);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(lstm.num_params());
  double accrued = 0.0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      const double scale = 1.0 / static_cast<double>(end - start);
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = train[order[i]];
        batch_loss += lstm.backward(ex.seq, ex.label, config.loss, grad, scale);
      }
      check_finite(batch_loss, ModelKind::kLstm, epoch);
      loss_sum += batch_loss;
      opt.step(lstm.params(), grad);
      ++result.parameter_updates;
    }
    const auto eval = score_lstm(lstm, test, config.loss);
    ++result.evaluations;
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss_mean = loss_sum / static_cast<double>(train.size());
    accrued += m.train_loss_mean;
    m.train_loss_accrued = accrued;
    m.test_loss = eval.loss;
    m.test_accuracy = eval.accuracy;
    result.metrics.push_back(m);
  }

  json ck = base_checkpoint(ModelKind::kLstm, config, ctx);
  ck["hidden"] = config.lstm.hidden;
  ck["parameter_count"] = result.parameter_count;
  ck["params"] = std::vector<double>(lstm.params().begin(), lstm.params().end());
  result.checkpoint = std::move(ck);
  return result;
}

TrainResult train_model(ModelKind kind, const ExperimentConfig& config, const Dataset& dataset,
                        const TrainContext& ctx) {
  return kind == ModelKind::kHybrid ? train_hybrid(config, dataset, ctx)
                                    : train_baseline(config, dataset, ctx);
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size() || labels.empty()) {
    throw HarnessError("accuracy needs equally sized, non-empty inputs");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double majority_rate(const std::vector<int>& labels) {
  if (labels.empty()) throw HarnessError("majority rate of an empty label set");
  const auto zeros = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0));
  return static_cast<double>(std::max(zeros, labels.size() - zeros)) /
         static_cast<double>(labels.size());
}

EvalResult evaluate(const json& checkpoint, const Dataset& dataset,
                    const std::string& dataset_hash) {
  try {
    if (checkpoint.at("dataset_hash").get<std::string>() != dataset_hash) {
      throw HarnessError("checkpoint was trained on a different dataset (hash mismatch)");
    }
    const ModelKind kind = parse_model_kind(checkpoint.at("model").get<std::string>());
    const double w = angular_frequency(checkpoint.at("carrier_frequency_hz").get<double>());
    const LossKind loss = parse_loss(checkpoint.value("loss", std::string("cross_entropy")));
    if (kind == ModelKind::kHybrid) {
      AnsatzShape ansatz{checkpoint.at("qubits").get<int>(), checkpoint.at("layers").get<int>()};
      HeadShape head;
      head.inputs = ansatz.num_qubits;
      head.hidden1 = checkpoint.at("hidden1").get<int>();
      head.hidden2 = checkpoint.at("hidden2").get<int>();
      head.dropout = checkpoint.at("dropout").get<double>();
      HybridModel model(ansatz, head);
      const auto lambda = checkpoint.at("lambda").get<std::vector<double>>();
      const auto gamma = checkpoint.at("gamma").get<std::vector<double>>();
      if (lambda.size() != model.lambda().size() || gamma.size() != model.head().num_params()) {
        throw HarnessError("checkpoint parameter vectors have the wrong length");
      }
      std::copy(lambda.begin(), lambda.end(), model.lambda().begin());
      std::copy(gamma.begin(), gamma.end(), model.head().params().begin());
      const auto test = field_examples(dataset, Split::kTest, w, checkpoint.at("t_int").get<double>(),
                                       checkpoint.at("detuning").get<double>());
      if (test.empty()) throw HarnessError("dataset has no test split");
      return score_hybrid(model, test, loss);
    }
    LstmShape shape;
    shape.hidden = checkpoint.at("hidden").get<int>();
    Lstm lstm(shape);
    const auto params = checkpoint.at("params").get<std::vector<double>>();
    if (params.size() != lstm.num_params()) throw HarnessError("checkpoint LSTM size mismatch");
    std::copy(params.begin(), params.end(), lstm.params().begin());
    const auto test = sequence_examples(dataset, Split::kTest, w);
    if (test.empty()) throw HarnessError("dataset has no test split");
    return score_lstm(lstm, test, loss);
  } catch (const json::exception& e) {
    throw HarnessError(std::string("malformed checkpoint: ") + e.what());
  }
}

TrialSummary run_trials(ModelKind model, const ExperimentConfig& config, const Scene& scene,
                        const Dataset& dataset, const std::string& dataset_hash) {
  TrialSummary summary;
  summary.model = model;
  // One thread per trial, collected in seed order.
  std::vector<std::future<std::vector<EpochMetrics>>> jobs;
  for (std::uint64_t seed : config.seeds) {
    jobs.push_back(std::async(std::launch::async, [&, seed] {
      TrainContext ctx{scene.carrier_frequency_hz, dataset_hash, seed};
      return train_model(model, config, dataset, ctx).metrics;
    }));
  }
  for (auto& job : jobs) summary.per_trial.push_back(job.get());
  return summary;
}

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const std::vector<std::vector<EpochMetrics>>& per_trial, std::size_t epoch,
                double EpochMetrics::*field) {
  Moments m;
  const auto n = static_cast<double>(per_trial.size());
  for (const auto& t : per_trial) m.mean += t[epoch].*field;
  m.mean /= n;
  for (const auto& t : per_trial) {
    const double d = t[epoch].*field - m.mean;
    m.var += d * d;
  }
  m.var /= n;
  return m;
}

constexpr double EpochMetrics::*kFields[] = {
    &EpochMetrics::train_loss_mean, &EpochMetrics::train_loss_accrued, &EpochMetrics::test_loss,
    &EpochMetrics::test_accuracy};

std::size_t common_epochs(const std::vector<std::vector<EpochMetrics>>& per_trial) {
  if (per_trial.empty()) throw HarnessError("no trials to summarise");
  const std::size_t epochs = per_trial.front().size();
  for (const auto& t : per_trial) {
    if (t.size() != epochs) throw HarnessError("trials disagree on epoch count");
  }
  return epochs;
}

}  // namespace

std::string metrics_csv(const std::vector<std::vector<EpochMetrics>>& per_trial) {
  const std::size_t epochs = common_epochs(per_trial);
  std::string out = "epoch,trial,train_loss_mean,train_loss_accrued,test_loss,test_accuracy\n";
  for (std::size_t e = 0; e < epochs; ++e) {
    const std::string epoch = std::to_string(e + 1);
    for (std::size_t t = 0; t < per_trial.size(); ++t) {
      out += epoch + "," + std::to_string(t);
      for (auto f : kFields) out += "," + format_double(per_trial[t][e].*f);
      out += '\n';
    }
    std::string mean_row = epoch + ",mean";
    std::string var_row = epoch + ",var";
    for (auto f : kFields) {
      const auto m = moments(per_trial, e, f);
      mean_row += "," + format_double(m.mean);
      var_row += "," + format_double(m.var);
    }
    out += mean_row + "\n" + var_row + "\n";
  }
  return out;
}

std::string gnuplot_columns(const std::vector<std::vector<EpochMetrics>>& per_trial) {
  const std::size_t epochs = common_epochs(per_trial);
  std::string out =
      "# epoch train_loss_mean var train_loss_accrued var test_loss var test_accuracy var\n";
  for (std::size_t e = 0; e < epochs; ++e) {
    out += std::to_string(e + 1);
    for (auto f : kFields) {
      const auto m = moments(per_trial, e, f);
      out += " " + format_double(m.mean) + " " + format_double(m.var);
    }
    out += '\n';
  }
  return out;
}

}  // namespace vqrf
