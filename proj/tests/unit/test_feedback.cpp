#include <gtest/gtest.h>

#include <fstream>
#include <thread>

#include "flowguard/dataset_io.hpp"
#include "flowguard/errors.hpp"
#include "flowguard/feedback.hpp"
#include "flowguard/incidents.hpp"
#include "flowguard/traffic_sim.hpp"
#include "support/oracles.hpp"

using namespace flowguard;

namespace {

class FeedbackTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = oracle::fresh_dir("feedback");
    original_ = generate_corpus(20, 9);
    store_.emplace(TrainingStore::create(dir_ / "store", original_));
    const auto dist = ClassDistribution::from_probabilities({0.1, 0.6, 0.3});
    std::vector<FeatureVector> flows(original_.features.begin(), original_.features.begin() + 3);
    incident_ = incidents_.create(flows, dist, suggest(dist, default_knowledge_base(), 5), "m",
                                  *parse_utc("2026-03-01T10:00:00Z"));
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  Rating rating(int score, const std::string& ts = "2026-03-01T11:00:00Z") const {
    Rating r;
    r.incident_id = incident_.incident_id;
    r.flow_index = incident_.flows[0].flow_index;
    r.recommendation_id = incident_.suggestions[0].entry.recommendation_id;
    r.rated_class = ClassLabel::service_incident;
    r.score = score;
    r.timestamp = *parse_utc(ts);
    return r;
  }

  TrainConfig quick() const {
    TrainConfig c;
    c.epochs = 2;
    c.seed = 5;
    return c;
  }

  std::filesystem::path dir_;
  Dataset original_;
  std::optional<TrainingStore> store_;
  IncidentRepository incidents_;
  IncidentRecord incident_;
};

}  // namespace

TEST_F(FeedbackTest, ValidRatingIsStoredAndRetrievable) {
  const auto ack = record_rating(*store_, incidents_, rating(5));
  EXPECT_EQ(ack.outcome, RecordOutcome::stored);
  const auto reopened = TrainingStore::open(dir_ / "store");
  ASSERT_EQ(reopened.ratings().size(), 1u);
  EXPECT_EQ(reopened.ratings()[0], rating(5));
}

TEST_F(FeedbackTest, OutOfRangeScoreIsValidationError) {
  EXPECT_THROW(record_rating(*store_, incidents_, rating(6)), ValidationError);
  EXPECT_TRUE(store_->ratings().empty());
}

TEST_F(FeedbackTest, DuplicateTripleStoredOnce) {
  EXPECT_EQ(record_rating(*store_, incidents_, rating(5)).outcome, RecordOutcome::stored);
  EXPECT_EQ(record_rating(*store_, incidents_, rating(4)).outcome, RecordOutcome::duplicate);
  EXPECT_EQ(record_rating(*store_, incidents_, rating(5, "2026-03-01T11:00:01Z")).outcome, RecordOutcome::stored);
  EXPECT_EQ(store_->ratings().size(), 2u);
}

TEST_F(FeedbackTest, DanglingReferencesAreRejected) {
  auto r = rating(4);
  r.incident_id = "INC-999999";
  EXPECT_THROW(record_rating(*store_, incidents_, r), NotFoundError);
  r = rating(4);
  r.recommendation_id = "not-suggested";
  EXPECT_THROW(record_rating(*store_, incidents_, r), NotFoundError);
  r = rating(4);
  r.flow_index = -77;
  EXPECT_THROW(record_rating(*store_, incidents_, r), NotFoundError);
}

TEST_F(FeedbackTest, ConcurrentAppendsAreSerialized) {
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 10; ++i) {
        char ts[32];
        std::snprintf(ts, sizeof(ts), "2026-03-01T12:%02d:%02dZ", t, i);
        record_rating(*store_, incidents_, rating(3, ts));
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(TrainingStore::open(dir_ / "store").ratings().size(), 40u);
}

TEST_F(FeedbackTest, UpdateWeightIsScoreOverThree) {
  const std::vector<Rating> neutral{rating(3)};
  const auto u3 = build_training_update(incidents_, neutral);
  ASSERT_EQ(u3.size(), 1u);
  EXPECT_DOUBLE_EQ(u3.weights[0], 1.0);
  EXPECT_EQ(u3.labels[0], ClassLabel::service_incident);
  EXPECT_EQ(u3.provenance, Provenance::feedback_update);
  EXPECT_EQ(u3.features[0], incident_.flows[0]);
  const std::vector<Rating> high{rating(5)};
  EXPECT_NEAR(build_training_update(incidents_, high).weights[0], 1.6666666666666667, 1e-15);
  const std::vector<Rating> low{rating(1)};
  EXPECT_NEAR(build_training_update(incidents_, low).weights[0], 1.0 / 3.0, 1e-15);
  EXPECT_TRUE(build_training_update(incidents_, std::vector<Rating>{}).empty());
}

TEST_F(FeedbackTest, FoldingWritesOneIncrementalAndClearsPending) {
  record_rating(*store_, incidents_, rating(5));
  record_rating(*store_, incidents_, rating(2, "2026-03-01T11:30:00Z"));
  EXPECT_EQ(store_->pending_ratings().size(), 2u);
  const auto update = fold_pending_ratings(*store_, incidents_);
  EXPECT_EQ(update.size(), 2u);
  EXPECT_TRUE(store_->pending_ratings().empty());
  EXPECT_EQ(store_->incremental_paths().size(), 1u);
  EXPECT_TRUE(fold_pending_ratings(*store_, incidents_).empty());
  EXPECT_EQ(store_->incremental_paths().size(), 1u);
}

TEST_F(FeedbackTest, OriginalHashIsConstantAcrossFeedback) {
  const auto before = store_->original_checksum();
  const auto bytes_before = serialize_dataset(store_->load_original());
  for (int i = 0; i < 3; ++i) {
    char ts[32];
    std::snprintf(ts, sizeof(ts), "2026-03-01T13:00:%02dZ", i);
    record_rating(*store_, incidents_, rating(1 + 2 * i, ts));
    fold_pending_ratings(*store_, incidents_);
  }
  EXPECT_EQ(store_->original_checksum(), before);
  EXPECT_EQ(serialize_dataset(store_->load_original()), bytes_before);
  EXPECT_EQ(TrainingStore::open(dir_ / "store").original_checksum(), before);
}

TEST_F(FeedbackTest, StatusCases) {
  EXPECT_EQ(check_training_set(*store_), TrainingSetStatus::intact);
  record_rating(*store_, incidents_, rating(5));
  fold_pending_ratings(*store_, incidents_);
  EXPECT_EQ(check_training_set(*store_), TrainingSetStatus::intact);
  std::filesystem::remove(store_->incremental_paths()[0]);
  EXPECT_EQ(check_training_set(*store_), TrainingSetStatus::incremental_missing);
  {
    std::ofstream out(store_->original_path(), std::ios::app);
    out << "tamper\n";
  }
  EXPECT_THROW(check_training_set(*store_), UnrecoverableStoreError);
}

TEST_F(FeedbackTest, CorruptIncrementalCountsAsMissing) {
  record_rating(*store_, incidents_, rating(5));
  fold_pending_ratings(*store_, incidents_);
  {
    std::ofstream out(store_->incremental_paths()[0], std::ios::trunc);
    out << "# flowguard-dataset 1\n";
  }
  EXPECT_EQ(check_training_set(*store_), TrainingSetStatus::incremental_missing);
}

TEST_F(FeedbackTest, IntactStoreTrainsOnMergedSet) {
  record_rating(*store_, incidents_, rating(5));
  fold_pending_ratings(*store_, incidents_);
  const auto net = Network::initialize(default_layer_sizes(), 0.01, 1);
  const auto result = retrain(*store_, net, quick());
  EXPECT_EQ(result.mode, TrainMode::standard);
  EXPECT_EQ(result.status, TrainingSetStatus::intact);
  EXPECT_EQ(result.dataset_size, original_.size() + 1);
  EXPECT_EQ(result.report.train_samples, original_.size() + 1);
}

TEST_F(FeedbackTest, MissingIncrementalFallsBackToOriginalFromFreshParameters) {
  record_rating(*store_, incidents_, rating(5));
  fold_pending_ratings(*store_, incidents_);
  std::filesystem::remove(store_->incremental_paths()[0]);
  const auto net = Network::initialize(default_layer_sizes(), 0.01, 1);
  const auto result = retrain(*store_, net, quick());
  EXPECT_EQ(result.mode, TrainMode::retrain);
  EXPECT_EQ(result.dataset_size, original_.size());
  const auto fresh = Network::initialize(net.layer_sizes, net.alpha, quick().seed);
  const auto expected = train(fresh, original_, quick());
  EXPECT_EQ(result.net, expected.first);
}

TEST_F(FeedbackTest, EmptyIncrementalsEquivalentToOriginal) {
  const auto net = Network::initialize(default_layer_sizes(), 0.01, 1);
  const auto result = retrain(*store_, net, quick());
  const auto direct = train(net, original_, quick());
  EXPECT_EQ(result.mode, TrainMode::standard);
  EXPECT_EQ(result.net, direct.first);
  EXPECT_EQ(result.report, direct.second);
}

TEST_F(FeedbackTest, CorruptOriginalAbortsRetrain) {
  {
    std::ofstream out(store_->original_path(), std::ios::trunc);
    out << "garbage";
  }
  const auto net = Network::initialize(default_layer_sizes(), 0.01, 1);
  EXPECT_THROW(retrain(*store_, net, quick()), UnrecoverableStoreError);
  std::filesystem::remove(store_->original_path());
  EXPECT_THROW(retrain(*store_, net, quick()), UnrecoverableStoreError);
}

TEST_F(FeedbackTest, BrokenManifestIsUnrecoverable) {
  {
    std::ofstream out(dir_ / "store" / "manifest.json", std::ios::trunc);
    out << "{";
  }
  EXPECT_THROW(TrainingStore::open(dir_ / "store"), UnrecoverableStoreError);
  EXPECT_THROW(TrainingStore::open(dir_ / "nowhere"), UnrecoverableStoreError);
}
