#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "vqrf/harness.hpp"

using namespace vqrf;

namespace {

// A small, fast experiment on the canonical scene.
ExperimentConfig small_config() {
  ExperimentConfig c;
  c.scene_path = test::canonical_scene_path();
  c.samples = 120;
  c.batch_size = 16;
  c.epochs = 2;
  c.seeds = {5, 6};
  c.ansatz = {4, 2};
  c.head = {4, 16, 8, 2, 0.2};
  c.lstm.hidden = 6;
  return c;
}

const Scene& canonical() {
  static const Scene s = load_scene_file(test::canonical_scene_path());
  return s;
}

std::size_t csv_rows(const std::string& csv) {
  std::size_t n = 0;
  for (char ch : csv) n += ch == '\n' ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("default configuration") {
  ExperimentConfig c;
  CHECK(c.samples == 2000);
  CHECK(c.test_size() == 400);
  CHECK(c.batch_size == 64);
  CHECK(c.trials() == 3);
  CHECK(c.hybrid_learning_rate == 0.003);
  CHECK(c.lstm_learning_rate == 1e-4);
  CHECK_NOTHROW(c.validate());
  c.train_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), HarnessError);
}

TEST_CASE("config JSON round trip and hashing") {
  auto c = small_config();
  const auto again = config_from_json(to_json(c));
  CHECK(to_json(again) == to_json(c));
  CHECK(config_hash(again) == config_hash(c));
  auto moved = c;
  moved.scene_path = "/elsewhere/scene.json";
  CHECK(config_hash(moved) == config_hash(c));
  auto other = c;
  other.hybrid_learning_rate = 0.01;
  CHECK(config_hash(other) != config_hash(c));
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"models", {"svm"}}}), HarnessError);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("dataset generation") {
  ExperimentConfig c = small_config();
  c.samples = 2000;
  const auto ds = generate_dataset(canonical(), c);
  CHECK(ds.records.size() == 2000);
  CHECK(ds.count(Split::kTrain) == 1600);
  CHECK(ds.count(Split::kTest) == 400);

  SUBCASE("regeneration is byte-identical") {
    CHECK(serialize_dataset(generate_dataset(canonical(), c)) == serialize_dataset(ds));
  }

  SUBCASE("serialization round trip") {
    const auto text = serialize_dataset(ds);
    const auto back = parse_dataset(text);
    REQUIRE(back.records.size() == ds.records.size());
    CHECK(serialize_dataset(back) == text);
    CHECK_THROWS_AS(parse_dataset("{\"m\": 0}\n"), HarnessError);
  }

  SUBCASE("records are indexed once and labelled by the region") {
    std::set<std::size_t> seen;
    for (const auto& r : ds.records) {
      seen.insert(r.m);
      REQUIRE(r.label == label(r.position, canonical().target("A")));
    }
    CHECK(seen.size() == ds.records.size());
  }
}

TEST_CASE("target B locations never see a transmitter directly") {
  ExperimentConfig c = small_config();
  c.target = "B";
  c.samples = 400;
  const auto ds = generate_dataset(canonical(), c);
  std::size_t inside = 0;
  for (const auto& r : ds.records) {
    if (r.label != 0) continue;
    ++inside;
    for (const auto& p : r.paths.paths) REQUIRE(p.reflections() > 0);
  }
  CHECK(inside == 200);
}

TEST_CASE("training bookkeeping") {
  const auto c = small_config();
  const auto ds = generate_dataset(canonical(), c);
  const std::string hash = fnv1a_hex(serialize_dataset(ds));
  const TrainContext ctx{canonical().carrier_frequency_hz, hash, 5};
  const std::size_t batches = (ds.count(Split::kTrain) + c.batch_size - 1) / c.batch_size;

  const auto hybrid = train_hybrid(c, ds, ctx);
  CHECK(hybrid.metrics.size() == c.epochs);
  CHECK(hybrid.parameter_updates == batches * c.epochs);
  CHECK(hybrid.evaluations == c.epochs);
  CHECK(hybrid.parameter_count == c.ansatz.num_params() + c.head.num_params());
  CHECK(hybrid.metrics[1].train_loss_accrued ==
        doctest::Approx(hybrid.metrics[0].train_loss_mean + hybrid.metrics[1].train_loss_mean));

  const auto lstm = train_baseline(c, ds, ctx);
  CHECK(lstm.parameter_updates == batches * c.epochs);
  CHECK(lstm.evaluations == c.epochs);
  CHECK(lstm.parameter_count == c.lstm.num_params());
  CHECK(lstm.checkpoint.at("parameter_count") == c.lstm.num_params());

  SUBCASE("the full-size baseline reports its exact size") {
    auto full = c;
    full.lstm = LstmShape{};
    full.epochs = 1;
    CHECK(train_baseline(full, ds, ctx).parameter_count == 17282);
  }

  SUBCASE("evaluation reproduces the last epoch") {
    const auto eval = evaluate(hybrid.checkpoint, ds, hash);
    CHECK(eval.total == ds.count(Split::kTest));
    CHECK(eval.accuracy == hybrid.metrics.back().test_accuracy);
    CHECK(eval.loss == doctest::Approx(hybrid.metrics.back().test_loss).epsilon(1e-12));
    const auto leval = evaluate(lstm.checkpoint, ds, hash);
    CHECK(leval.accuracy == lstm.metrics.back().test_accuracy);
  }

  SUBCASE("evaluation uses the stored interaction time") {
    auto ck = hybrid.checkpoint;
    ck["t_int"] = ck["t_int"].get<double>() * 3.0;
    const auto shifted = evaluate(ck, ds, hash);
    CHECK(shifted.loss != doctest::Approx(hybrid.metrics.back().test_loss));
  }

  SUBCASE("a checkpoint from another dataset is refused") {
    CHECK_THROWS_AS(evaluate(hybrid.checkpoint, ds, "0000000000000000"), HarnessError);
  }
}

TEST_CASE("zero learning rate keeps the training loss constant") {
  auto c = small_config();
  c.hybrid_learning_rate = 0.0;
  c.head.dropout = 0.0;
  c.epochs = 3;
  const auto ds = generate_dataset(canonical(), c);
  const auto r = train_hybrid(c, ds, {canonical().carrier_frequency_hz, "h", 1});
  for (const auto& m : r.metrics) {
    CHECK(m.train_loss_mean == doctest::Approx(r.metrics[0].train_loss_mean).epsilon(1e-12));
    CHECK(m.test_loss == r.metrics[0].test_loss);
  }
}

TEST_CASE("train and test splits are disjoint") {
  const auto c = small_config();
  const auto ds = generate_dataset(canonical(), c);
  std::set<std::size_t> train, test;
  for (const auto& r : ds.records) (r.split == Split::kTrain ? train : test).insert(r.m);
  CHECK(train.size() + test.size() == ds.records.size());
  for (auto m : test) CHECK(train.count(m) == 0);
}

TEST_CASE("trials and metrics CSV") {
  const auto c = small_config();
  const auto ds = generate_dataset(canonical(), c);
  const std::string hash = fnv1a_hex(serialize_dataset(ds));
  const auto a = run_trials(ModelKind::kHybrid, c, canonical(), ds, hash);
  const auto b = run_trials(ModelKind::kHybrid, c, canonical(), ds, hash);
  REQUIRE(a.per_trial.size() == 2);
  const auto csv = metrics_csv(a.per_trial);
  CHECK(csv == metrics_csv(b.per_trial));
  CHECK(csv_rows(csv) == 1 + c.epochs * (c.trials() + 2));
  CHECK(csv.rfind("epoch,trial,train_loss_mean,train_loss_accrued,test_loss,test_accuracy\n", 0) == 0);
  CHECK(csv.find("\n1,mean,") != std::string::npos);
  CHECK(csv.find("\n2,var,") != std::string::npos);
  // Different seeds give different curves.
  CHECK(a.per_trial[0][0].train_loss_mean != a.per_trial[1][0].train_loss_mean);

  SUBCASE("one trial has zero variance") {
    const std::vector<std::vector<EpochMetrics>> single{a.per_trial[0]};
    const auto one = metrics_csv(single);
    std::istringstream in(one);
    std::string line;
    std::size_t vars = 0;
    while (std::getline(in, line)) {
      if (line.find(",var,") == std::string::npos) continue;
      ++vars;
      CHECK(line.substr(line.find(",var,") + 5) == "0,0,0,0");
    }
    CHECK(vars == c.epochs);
  }

  SUBCASE("gnuplot columns carry one line per epoch") {
    const auto cols = gnuplot_columns(a.per_trial);
    std::size_t data_lines = 0;
    std::istringstream in(cols);
    std::string line;
    while (std::getline(in, line)) data_lines += (!line.empty() && line[0] != '#') ? 1 : 0;
    CHECK(data_lines == c.epochs);
  }
}

TEST_CASE("accuracy helpers") {
  CHECK(accuracy({0, 1, 1, 0}, {0, 1, 0, 0}) == 0.75);
  CHECK(majority_rate({0, 1, 1, 1}) == 0.75);
  CHECK(majority_rate({0, 0, 1, 1}) == 0.5);
  CHECK_THROWS_AS(accuracy({0}, {0, 1}), HarnessError);
  CHECK_THROWS_AS(majority_rate({}), HarnessError);
}
