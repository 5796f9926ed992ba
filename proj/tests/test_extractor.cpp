#include <cmath>

#include "doctest.h"
#include "error.hpp"
#include "extractor.hpp"
#include "rng.hpp"
#include "support.hpp"
#include "synth_fixture.hpp"

using namespace kpforge;
using Vecs = std::vector<std::vector<double>>;

TEST_CASE("contrastive_loss closed forms") {
  const std::vector<double> doc = {1, 0};
  CHECK(contrastive_loss(doc, Vecs{{1, 0}}, Vecs{}, 0.1) == 0.0);
  CHECK(std::abs(contrastive_loss(doc, Vecs{{1, 0}}, Vecs{{0, 1}}, 1.0) - std::log1p(std::exp(-1.0))) < 1e-15);
  CHECK(std::abs(contrastive_loss(doc, Vecs{{1, 0}}, Vecs{{0, 1}}, 1.0) - 0.31326) < 1e-5);
  CHECK(std::abs(contrastive_loss(doc, Vecs{{1, 0}}, Vecs{{0, 1}}, 0.1) - 4.54e-5) < 1e-7);
  CHECK_THROWS_AS(contrastive_loss(doc, Vecs{}, Vecs{{0, 1}}, 0.1), Error);
  CHECK_THROWS_AS(contrastive_loss(doc, Vecs{{1, 0}}, Vecs{}, 0.0), Error);
  // Summed over positives.
  const double one = contrastive_loss(doc, Vecs{{1, 0}}, Vecs{{0, 1}}, 0.5);
  CHECK(std::abs(contrastive_loss(doc, Vecs{{1, 0}, {2, 0}}, Vecs{{0, 1}}, 0.5) - 2 * one) < 1e-15);
}

TEST_CASE("contrastive objective properties") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const double tau = rng.uniform(0.05, 2.0);
    std::vector<double> pos(1 + rng.below(3)), neg(rng.below(5));
    for (auto& p : pos) p = rng.uniform(-1, 1);
    for (auto& n : neg) n = rng.uniform(-1, 1);
    const double base = contrastive_from_similarities(pos, neg, tau);
    CHECK(base >= 0.0);
    if (neg.empty()) {
      CHECK(base == 0.0);
      continue;
    }
    CHECK(base > 0.0);

    const double c = rng.uniform(-3, 3);
    auto pos_s = pos, neg_s = neg;
    for (auto& p : pos_s) p += c;
    for (auto& n : neg_s) n += c;
    CHECK(std::abs(contrastive_from_similarities(pos_s, neg_s, tau) - base) < 1e-9);

    auto neg_up = neg;
    neg_up[rng.below(neg.size())] += 0.05;
    CHECK(contrastive_from_similarities(pos, neg_up, tau) > base);
    auto pos_up = pos;
    pos_up[rng.below(pos.size())] += 0.05;
    CHECK(contrastive_from_similarities(pos_up, neg, tau) < base);
  }
}

TEST_CASE("joint_loss") {
  CHECK(std::abs(joint_loss(1.0, 2.0, 0.3) - 1.6) < 1e-15);
  CHECK(joint_loss(1.25, 7.0, 0.0) == 1.25);
  TrainConfig cfg;
  CHECK(cfg.lambda == 0.3);
  CHECK(cfg.tau == 0.1);
  cfg.lambda = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.lambda = 0.3;
  cfg.tau = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

namespace {

Stage1Model ten_token_model() {
  std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta"};
  EncoderConfig cfg;
  cfg.embed_dim = 6;
  cfg.proj_dim = 4;
  cfg.seed = 5;
  auto model = Stage1Model::create(cfg, Vocabulary::build({words}));
  // Wider init than the default so the tanh and softmax paths are exercised.
  init_uniform(model.params, 17, 0.6);
  return model;
}

}  // namespace

TEST_CASE("joint loss gradient matches central differences") {
  auto model = ten_token_model();
  const std::vector<std::string> doc = {"alpha", "beta", "gamma", "delta", "eps",
                                        "zeta",  "eta",  "theta", "alpha", "gamma"};
  const auto ids = model.vocab.ids(doc);
  const std::vector<PhraseCandidate> pos = {{0, 2, "alpha beta", "alpha beta"}, {5, 6, "zeta", "zeta"}};
  const std::vector<PhraseCandidate> neg = {{2, 3, "gamma", "gamma"}, {3, 5, "delta eps", "delta eps"},
                                            {7, 10, "theta alpha gamma", "theta alpha gamma"}};
  const auto target = build_target_sequence({{"eta", "beta"}, {"delta"}}, model.vocab);
  for (double lambda : {0.3, 1.0}) {
    auto result = testing::gradient_check(model.params, [&](Tape& t) {
      return stage1_loss(t, model, ids, pos, neg, target, 0.5, lambda)->total;
    });
    INFO(result.worst);
    CHECK(result.checked == model.params.scalar_count());
    CHECK(result.max_rel_error < 1e-4);
  }
}

TEST_CASE("stage1_loss drops undefined terms") {
  auto model = ten_token_model();
  const std::vector<int> ids = model.vocab.ids(std::vector<std::string>{"alpha", "beta"});
  const std::vector<PhraseCandidate> pos = {{0, 1, "alpha", "alpha"}};
  const std::vector<int> target = build_target_sequence({{"beta"}}, model.vocab);
  Tape t(false);
  CHECK_FALSE(stage1_loss(t, model, ids, {}, pos, {}, 0.1, 0.3).has_value());
  const auto only_cl = stage1_loss(t, model, ids, pos, {}, {}, 0.1, 0.3);
  REQUIRE(only_cl);
  CHECK_FALSE(only_cl->mle);
  CHECK(*only_cl->cl == 0.0);
  const auto only_mle = stage1_loss(t, model, ids, {}, pos, target, 0.1, 0.3);
  REQUIRE(only_mle);
  CHECK_FALSE(only_mle->cl);
  CHECK(t.scalar(only_mle->total) == *only_mle->mle);
}

TEST_CASE("aggregation and selection") {
  const auto agg = aggregate_max({{"x", "x", 0.4}, {"y", "y", 0.1}, {"x", "xs", 0.7}});
  REQUIRE(agg.size() == 2);
  CHECK(agg[0].stemmed == "x");
  CHECK(agg[0].score == 0.7);
  CHECK(agg[0].surface == "xs");

  const auto sel = select_by_threshold(aggregate_max({{"c", "c", 0.2}, {"a", "a", 0.9}, {"b", "b", 0.6}}), 0.5);
  REQUIRE(sel.size() == 3);
  CHECK(sel[0].stemmed == "a");
  CHECK(sel[2].stemmed == "c");

  const auto ties = aggregate_max({{"b", "b", 0.5}, {"a", "a", 0.5}});
  CHECK(ties[0].stemmed == "a");
}

TEST_CASE("predict_present on a document") {
  LabeledDocument doc{"d", "Graph kernels", "We study graph kernels and random walks on large social networks.",
                      {"graph kernels"}, std::nullopt, std::nullopt};
  const auto prepared = prepare_document(doc, MinerConfig{});
  REQUIRE(prepared.labels.positives.size() == 1);
  CHECK(prepared.present_gold == std::vector<std::string>{"graph kernel"});
  auto model = Stage1Model::create(EncoderConfig{}, build_vocabulary(std::span(&prepared, 1)));
  const auto all = predict_present(model, prepared, -1.0);
  CHECK(all.size() == prepared.candidates.size());
  for (std::size_t i = 1; i < all.size(); ++i) {
    CHECK(all[i - 1].score >= all[i].score);
    if (all[i - 1].score == all[i].score) CHECK(all[i - 1].stemmed < all[i].stemmed);
  }
  CHECK(predict_present(model, prepared, 2.0).size() == std::min<std::size_t>(5, all.size()));
  CHECK(predict_present(model, prepared, 2.0, 0).empty());
}

TEST_CASE("stage-1 training on a synthetic corpus") {
  SynthConfig sc;
  sc.test = 0;
  const auto corpus = generate_synthetic(sc);
  const auto train = testing::prepare_all(corpus.train);
  const auto valid = testing::prepare_all(corpus.valid);

  TrainConfig cfg;
  EncoderConfig enc;
  const auto run = train_stage1(train, valid, enc, cfg);
  // Mean contrastive loss over the first and the last epoch.
  const std::size_t per_epoch = (train.size() + cfg.loop.batch_size - 1) / cfg.loop.batch_size;
  const auto& log = run.summary.log;
  REQUIRE(log.size() >= 2 * per_epoch);
  auto epoch_mean = [&](std::size_t begin) {
    double sum = 0;
    std::size_t n = 0;
    for (std::size_t i = begin; i < begin + per_epoch; ++i)
      if (log[i].cl) {
        sum += *log[i].cl;
        ++n;
      }
    return sum / static_cast<double>(n);
  };
  const double first = epoch_mean(0), last = epoch_mean(log.size() - per_epoch);
  INFO("first epoch cl=" << first << " last epoch cl=" << last);
  CHECK(last <= 0.5 * first);

  const auto again = train_stage1(train, valid, enc, cfg);
  bool identical = true;
  for (std::size_t i = 0; i < run.model.params.params().size(); ++i)
    identical = identical && run.model.params.params()[i].value.data == again.model.params.params()[i].value.data;
  CHECK(identical);

  // With lambda = 0 the projection heads never see a gradient, so the
  // positive-vs-negative score gap stays near zero.
  auto control_cfg = cfg;
  control_cfg.lambda = 0.0;
  const auto control = train_stage1(train, valid, enc, control_cfg);
  const double trained_gap = testing::mean_score_gap(run.model, valid);
  const double control_gap = testing::mean_score_gap(control.model, valid);
  INFO("trained gap=" << trained_gap << " control gap=" << control_gap);
  CHECK(trained_gap > 0.2);
  CHECK(std::abs(control_gap) < 0.25 * trained_gap);
}
